#pragma once

#include <string>
#include <vector>

#include <testgen/runtime/reflect.hpp>

namespace shapes {

struct Rect {
  double w = 0;
  double h = 0;
};

class Canvas {
 public:
  void add(const Rect& r);
  double area() const;
  static int clamp_count(int n);
  std::vector<Rect> larger_than(double a) const;

 private:
  TESTGEN_FRIEND(shapes::Canvas)
  std::vector<Rect> rects_;
};

std::string describe(const Rect& r);

}  // namespace shapes

TESTGEN_REFLECT(shapes::Rect, w, h)
TESTGEN_REFLECT(shapes::Canvas, rects_)
