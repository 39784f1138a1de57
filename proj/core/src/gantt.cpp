#include "fjsrl/gantt.hpp"

#include <sstream>
#include <stdexcept>

namespace fjsrl {

std::string emit_gantt(const Instance& instance, const Schedule& schedule) {
  const std::vector<Violation> violations = validate_schedule(instance, schedule);
  if (!violations.empty()) {
    throw std::invalid_argument("refusing to draw an infeasible schedule: " +
                                violations.front().detail);
  }
  const long long horizon = makespan(schedule);

  const double margin_left = 60.0, margin_top = 30.0;
  const double row_height = 28.0, row_gap = 6.0;
  const double chart_width = 900.0;
  const double scale = chart_width / static_cast<double>(horizon);
  const int m = instance.n_machines();
  const double height = margin_top + m * (row_height + row_gap) + 40.0;
  const double width = margin_left + chart_width + 40.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<title>schedule, makespan " << horizon << "</title>\n";

  for (int j = 0; j < m; ++j) {
    const double y = margin_top + j * (row_height + row_gap);
    svg << "<text x=\"4\" y=\"" << y + row_height * 0.65 << "\">M" << j
        << "</text>\n";
    svg << "<line x1=\"" << margin_left << "\" y1=\"" << y + row_height
        << "\" x2=\"" << margin_left + chart_width << "\" y2=\""
        << y + row_height << "\" stroke=\"#ddd\"/>\n";
  }

  for (const Assignment& a : schedule.assignments) {
    const double x = margin_left + static_cast<double>(a.start) * scale;
    const double w = static_cast<double>(a.end - a.start) * scale;
    const double y = margin_top + a.machine_id * (row_height + row_gap);
    const int hue = (a.job_id * 137) % 360;
    svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w
        << "\" height=\"" << row_height << "\" fill=\"hsl(" << hue
        << ",65%,60%)\" stroke=\"#333\">"
        << "<title>J" << a.job_id << "." << a.op_index << " [" << a.start
        << "," << a.end << ")</title></rect>\n";
    if (w > 24.0) {
      svg << "<text x=\"" << x + 3 << "\" y=\"" << y + row_height * 0.65
          << "\">J" << a.job_id << "." << a.op_index << "</text>\n";
    }
  }

  // Time axis with the makespan tick at the right edge.
  const double axis_y = margin_top + m * (row_height + row_gap) + 12.0;
  svg << "<line x1=\"" << margin_left << "\" y1=\"" << axis_y << "\" x2=\""
      << margin_left + chart_width << "\" y2=\"" << axis_y
      << "\" stroke=\"#333\"/>\n";
  svg << "<text x=\"" << margin_left << "\" y=\"" << axis_y + 14 << "\">0</text>\n";
  svg << "<text x=\"" << margin_left + chart_width - 4 << "\" y=\""
      << axis_y + 14 << "\" text-anchor=\"end\">" << horizon << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fjsrl
