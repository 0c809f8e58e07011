#include "fsi/fe.hpp"

#include <cmath>
#include <stdexcept>

namespace fsi {

namespace {

GaussRule make_rule(std::vector<double> nodes, std::vector<double> weights) {
  // Nodes and weights are given on [-1, 1].
  GaussRule rule;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    rule.points.push_back(0.5 * (nodes[i] + 1.0));
    rule.weights.push_back(0.5 * weights[i]);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_rule(int n) {
  static const std::array<GaussRule, 5> rules = [] {
    const double s3 = std::sqrt(3.0 / 5.0);
    const double a4 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double b4 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double wa4 = (18.0 + std::sqrt(30.0)) / 36.0;
    const double wb4 = (18.0 - std::sqrt(30.0)) / 36.0;
    const double a5 = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double b5 = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double wa5 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double wb5 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    return std::array<GaussRule, 5>{
        make_rule({0.0}, {2.0}),
        make_rule({-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)}, {1.0, 1.0}),
        make_rule({-s3, 0.0, s3}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}),
        make_rule({-b4, -a4, a4, b4}, {wb4, wa4, wa4, wb4}),
        make_rule({-b5, -a5, 0.0, a5, b5}, {wb5, wa5, 128.0 / 225.0, wa5, wb5}),
    };
  }();
  if (n < 1 || n > 5) throw std::out_of_range("gauss_rule supports 1..5 points");
  return rules[static_cast<std::size_t>(n - 1)];
}

namespace q1 {

std::array<double, 4> values(double s, double t) {
  return {(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t};
}

std::array<Vec2, 4> ref_gradients(double s, double t) {
  return {Vec2(-(1 - t), -(1 - s)), Vec2(1 - t, -s), Vec2(t, s), Vec2(-t, 1 - s)};
}

}  // namespace q1

namespace q2 {

namespace {
inline std::array<double, 3> lagrange(double s) {
  return {2.0 * (s - 0.5) * (s - 1.0), -4.0 * s * (s - 1.0), 2.0 * s * (s - 0.5)};
}
inline std::array<double, 3> lagrange_d(double s) {
  return {4.0 * s - 3.0, -8.0 * s + 4.0, 4.0 * s - 1.0};
}
}  // namespace

std::array<double, 9> values(double s, double t) {
  const auto ls = lagrange(s);
  const auto lt = lagrange(t);
  std::array<double, 9> out{};
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) out[i + 3 * j] = ls[i] * lt[j];
  return out;
}

std::array<Vec2, 9> ref_gradients(double s, double t) {
  const auto ls = lagrange(s);
  const auto lt = lagrange(t);
  const auto ds = lagrange_d(s);
  const auto dt = lagrange_d(t);
  std::array<Vec2, 9> out{};
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) out[i + 3 * j] = Vec2(ds[i] * lt[j], ls[i] * dt[j]);
  return out;
}

}  // namespace q2

namespace hermite {

std::array<double, 4> values(double xi, double h) {
  const double x2 = xi * xi;
  const double x3 = x2 * xi;
  return {1 - 3 * x2 + 2 * x3, h * (xi - 2 * x2 + x3), 3 * x2 - 2 * x3, h * (x3 - x2)};
}

std::array<double, 4> first_derivatives(double xi, double h) {
  const double x2 = xi * xi;
  return {(-6 * xi + 6 * x2) / h, 1 - 4 * xi + 3 * x2, (6 * xi - 6 * x2) / h, 3 * x2 - 2 * xi};
}

std::array<double, 4> second_derivatives(double xi, double h) {
  return {(-6 + 12 * xi) / (h * h), (-4 + 6 * xi) / h, (6 - 12 * xi) / (h * h), (6 * xi - 2) / h};
}

}  // namespace hermite

Vec2 CellMap::point(double s, double t) const {
  const auto n = q1::values(s, t);
  Vec2 x = Vec2::Zero();
  for (int a = 0; a < 4; ++a) x += n[a] * vertices[a];
  return x;
}

Mat2 CellMap::jacobian(double s, double t) const {
  const auto g = q1::ref_gradients(s, t);
  Mat2 jac = Mat2::Zero();
  for (int a = 0; a < 4; ++a) jac += vertices[a] * g[a].transpose();
  return jac;
}

}  // namespace fsi
