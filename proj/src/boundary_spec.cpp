#include "milnelab/boundary_spec.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace milnelab {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("BoundarySpec: bad number '" + s + "'");
  return v;
}

struct Table {
  std::vector<double> angle, value;
  double at(double phi) const {
    // Wrap into [angle.front(), angle.front() + 2pi).
    const double lo = angle.front();
    double x = std::fmod(phi - lo, 2.0 * M_PI);
    if (x < 0.0) x += 2.0 * M_PI;
    x += lo;
    auto it = std::upper_bound(angle.begin(), angle.end(), x);
    if (it == angle.begin()) return value.front();
    const size_t i = static_cast<size_t>(it - angle.begin()) - 1;
    if (i + 1 >= angle.size()) {
      // Periodic closing segment back to the first sample.
      const double span = angle.front() + 2.0 * M_PI - angle.back();
      const double t = span > 0.0 ? (x - angle.back()) / span : 0.0;
      return value.back() + t * (value.front() - value.back());
    }
    const double t = (x - angle[i]) / (angle[i + 1] - angle[i]);
    return value[i] + t * (value[i + 1] - value[i]);
  }
};

}  // namespace

BoundarySpec BoundarySpec::constant(double c) {
  BoundarySpec spec;
  spec.text = "const:" + std::to_string(c);
  spec.eval = [c](double) { return c; };
  return spec;
}

BoundarySpec BoundarySpec::cosine(int k, double shift) {
  BoundarySpec spec;
  spec.text = "cos:" + std::to_string(k) +
              (shift != 0.0 ? ":" + std::to_string(shift) : "");
  spec.eval = [k, shift](double phi) { return std::cos(k * phi) + shift; };
  return spec;
}

BoundarySpec BoundarySpec::parse(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw std::invalid_argument("BoundarySpec: empty spec");
  if (parts[0] == "const") {
    if (parts.size() != 2)
      throw std::invalid_argument("BoundarySpec: const:<c>");
    BoundarySpec spec = constant(to_double(parts[1]));
    spec.text = text;
    return spec;
  }
  if (parts[0] == "cos") {
    if (parts.size() != 2 && parts.size() != 3)
      throw std::invalid_argument("BoundarySpec: cos:<k>[:shift]");
    const int k = static_cast<int>(to_double(parts[1]));
    const double shift = parts.size() == 3 ? to_double(parts[2]) : 0.0;
    BoundarySpec spec = cosine(k, shift);
    spec.text = text;
    return spec;
  }
  if (parts[0] == "table") {
    if (parts.size() != 2)
      throw std::invalid_argument("BoundarySpec: table:<path>");
    std::ifstream in(parts[1]);
    if (!in) throw std::invalid_argument("BoundarySpec: cannot open " + parts[1]);
    auto table = std::make_shared<Table>();
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cols = split(line, ',');
      if (cols.size() != 2) continue;
      try {
        const double a = to_double(cols[0]);
        const double v = to_double(cols[1]);
        table->angle.push_back(a);
        table->value.push_back(v);
      } catch (const std::exception&) {
        continue;  // header row
      }
    }
    if (table->angle.size() < 2)
      throw std::invalid_argument("BoundarySpec: table needs >= 2 rows");
    BoundarySpec spec;
    spec.text = text;
    spec.eval = [table](double phi) { return table->at(phi); };
    return spec;
  }
  throw std::invalid_argument("BoundarySpec: unknown kind '" + parts[0] + "'");
}

}  // namespace milnelab
