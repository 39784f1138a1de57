#include "fjsrl/cli.hpp"

int main(int argc, char** argv) { return fjsrl::run_cli(argc, argv); }
