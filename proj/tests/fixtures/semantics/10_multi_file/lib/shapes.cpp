#include "shapes.hpp"

#include <cstdio>

namespace shapes {

// @GenerateTestCases
void Canvas::add(const Rect& r) {
  if (r.w <= 0 || r.h <= 0) return;
  rects_.push_back(r);
}

// @GenerateTestCases
double Canvas::area() const {
  double total = 0;
  for (const auto& r : rects_) total += r.w * r.h;
  return total;
}

// @GenerateTestCases
int Canvas::clamp_count(int n) { return n < 0 ? 0 : (n > 9 ? 9 : n); }

// @GenerateTestCases
std::vector<Rect> Canvas::larger_than(double a) const {
  std::vector<Rect> out;
  for (const auto& r : rects_) {
    if (r.w * r.h > a) out.push_back(r);
  }
  return out;
}

// @GenerateTestCases
std::string describe(const Rect& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%gx%g", r.w, r.h);
  return buf;
}

}  // namespace shapes
