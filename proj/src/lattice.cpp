#include "cflow/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace cflow {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

double wrap_unit(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r -= 1.0;
  return r;
}

} // namespace

double angle_gram_factor(double alpha_deg, double beta_deg, double gamma_deg) {
  const double ca = std::cos(alpha_deg * kDegToRad);
  const double cb = std::cos(beta_deg * kDegToRad);
  const double cg = std::cos(gamma_deg * kDegToRad);
  return 1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg;
}

bool lattice_params_valid(const LatticeParams& p) {
  if (!(p.a > 0.0 && p.b > 0.0 && p.c > 0.0)) return false;
  for (double ang : {p.alpha, p.beta, p.gamma})
    if (!(ang > 0.0 && ang < 180.0)) return false;
  return angle_gram_factor(p.alpha, p.beta, p.gamma) > 0.0;
}

LatticeMatrix params_to_matrix(const LatticeParams& p) {
  if (!(p.a > 0.0 && p.b > 0.0 && p.c > 0.0))
    throw std::invalid_argument("params_to_matrix: non-positive cell length");
  const double gram = angle_gram_factor(p.alpha, p.beta, p.gamma);
  if (!(gram > 0.0))
    throw std::invalid_argument("params_to_matrix: degenerate angle combination");

  const double ca = std::cos(p.alpha * kDegToRad);
  const double cb = std::cos(p.beta * kDegToRad);
  const double cg = std::cos(p.gamma * kDegToRad);
  const double sg = std::sin(p.gamma * kDegToRad);

  // c vector components in the (a, b-perp) frame
  const double cx = cb;
  const double cy = (ca - cb * cg) / sg;
  const double cz2 = 1.0 - cx * cx - cy * cy;
  const double cz = std::sqrt(std::max(cz2, 0.0));

  LatticeMatrix m;
  m.row(0) << p.a, 0.0, 0.0;
  m.row(1) << p.b * cg, p.b * sg, 0.0;
  m.row(2) << p.c * cx, p.c * cy, p.c * cz;
  return m;
}

LatticeParams matrix_to_params(const LatticeMatrix& m) {
  if (!(m.determinant() > 0.0))
    throw std::invalid_argument("matrix_to_params: matrix must have positive determinant");
  const Vec3 va = m.row(0), vb = m.row(1), vc = m.row(2);
  LatticeParams p;
  p.a = va.norm();
  p.b = vb.norm();
  p.c = vc.norm();
  auto angle = [](const Vec3& u, const Vec3& v) {
    double cosv = u.dot(v) / (u.norm() * v.norm());
    cosv = std::clamp(cosv, -1.0, 1.0);
    return std::acos(cosv) / kDegToRad;
  };
  p.alpha = angle(vb, vc);
  p.beta = angle(va, vc);
  p.gamma = angle(va, vb);
  return p;
}

double cell_volume(const LatticeParams& p) {
  return p.a * p.b * p.c * std::sqrt(std::max(angle_gram_factor(p.alpha, p.beta, p.gamma), 0.0));
}

namespace {

// State for the metric-tensor reduction. A = a.a, B = b.b, C = c.c,
// xi = 2 b.c, eta = 2 a.c, zeta = 2 a.b.
struct G6 {
  double A, B, C, xi, eta, zeta;
};

int sign3(double x, double eps) { return x > eps ? 1 : (x < -eps ? -1 : 0); }

// All step transforms below act on the row basis, L' = P * L, and have
// determinant +1, so handedness survives reduction.
void apply(Eigen::Matrix3i& total, const Eigen::Matrix3i& step) { total = step * total; }

} // namespace

NiggliResult niggli_reduce(const LatticeParams& p, const FracCoords& frac) {
  const LatticeMatrix m = params_to_matrix(p);
  const Mat3 gram = m * m.transpose();
  G6 g{gram(0, 0), gram(1, 1), gram(2, 2), 2 * gram(1, 2), 2 * gram(0, 2), 2 * gram(0, 1)};

  const double mean_len = (p.a + p.b + p.c) / 3.0;
  const double eps = 1e-5 * mean_len * mean_len;
  constexpr int kMaxIter = 1000;

  Eigen::Matrix3i total = Eigen::Matrix3i::Identity();
  int iter = 0;
  while (true) {
    if (++iter > kMaxIter)
      throw std::runtime_error("niggli_reduce: no convergence after 1000 steps (degenerate cell)");

    // step 1: order A <= B
    if (g.A > g.B + eps || (std::abs(g.A - g.B) <= eps && std::abs(g.xi) > std::abs(g.eta) + eps)) {
      std::swap(g.A, g.B);
      std::swap(g.xi, g.eta);
      Eigen::Matrix3i s;
      s << 0, -1, 0, -1, 0, 0, 0, 0, -1;
      apply(total, s);
    }
    // step 2: order B <= C
    if (g.B > g.C + eps || (std::abs(g.B - g.C) <= eps && std::abs(g.eta) > std::abs(g.zeta) + eps)) {
      std::swap(g.B, g.C);
      std::swap(g.eta, g.zeta);
      Eigen::Matrix3i s;
      s << -1, 0, 0, 0, 0, -1, 0, -1, 0;
      apply(total, s);
      continue;
    }
    // steps 3/4: fix the signs of (xi, eta, zeta)
    {
      const int l = sign3(g.xi, eps), mm = sign3(g.eta, eps), nn = sign3(g.zeta, eps);
      int i = 1, j = 1, k = 1;
      if (l * mm * nn == 1) {
        if (l == -1) i = -1;
        if (mm == -1) j = -1;
        if (nn == -1) k = -1;
      } else {
        if (l == 1) i = -1;
        if (mm == 1) j = -1;
        if (nn == 1) k = -1;
        if (i * j * k == -1) {
          if (nn == 0)
            k = -1;
          else if (mm == 0)
            j = -1;
          else if (l == 0)
            i = -1;
        }
      }
      if (i != 1 || j != 1 || k != 1) {
        g.xi *= j * k;
        g.eta *= i * k;
        g.zeta *= i * j;
        Eigen::Matrix3i s = Eigen::Matrix3i::Zero();
        s(0, 0) = i;
        s(1, 1) = j;
        s(2, 2) = k;
        apply(total, s);
      }
    }
    // step 5: |xi| <= B
    if (std::abs(g.xi) > g.B + eps ||
        (std::abs(g.xi - g.B) <= eps && 2 * g.eta < g.zeta - eps) ||
        (std::abs(g.xi + g.B) <= eps && g.zeta < -eps)) {
      const double s = g.xi > 0 ? 1.0 : -1.0;
      g.C += g.B - s * g.xi;
      g.eta -= s * g.zeta;
      g.xi -= 2 * s * g.B;
      Eigen::Matrix3i step = Eigen::Matrix3i::Identity();
      step(2, 1) = -static_cast<int>(s);
      apply(total, step);
      continue;
    }
    // step 6: |eta| <= A
    if (std::abs(g.eta) > g.A + eps ||
        (std::abs(g.eta - g.A) <= eps && 2 * g.xi < g.zeta - eps) ||
        (std::abs(g.eta + g.A) <= eps && g.zeta < -eps)) {
      const double s = g.eta > 0 ? 1.0 : -1.0;
      g.C += g.A - s * g.eta;
      g.xi -= s * g.zeta;
      g.eta -= 2 * s * g.A;
      Eigen::Matrix3i step = Eigen::Matrix3i::Identity();
      step(2, 0) = -static_cast<int>(s);
      apply(total, step);
      continue;
    }
    // step 7: |zeta| <= A
    if (std::abs(g.zeta) > g.A + eps ||
        (std::abs(g.zeta - g.A) <= eps && 2 * g.xi < g.eta - eps) ||
        (std::abs(g.zeta + g.A) <= eps && g.eta < -eps)) {
      const double s = g.zeta > 0 ? 1.0 : -1.0;
      g.B += g.A - s * g.zeta;
      g.xi -= s * g.eta;
      g.zeta -= 2 * s * g.A;
      Eigen::Matrix3i step = Eigen::Matrix3i::Identity();
      step(1, 0) = -static_cast<int>(s);
      apply(total, step);
      continue;
    }
    // step 8: positive body diagonal
    if (g.xi + g.eta + g.zeta + g.A + g.B < -eps ||
        (std::abs(g.xi + g.eta + g.zeta + g.A + g.B) <= eps && 2 * (g.A + g.eta) + g.zeta > eps)) {
      g.C += g.A + g.B + g.xi + g.eta + g.zeta;
      g.xi += 2 * g.B + g.zeta;
      g.eta += 2 * g.A + g.zeta;
      Eigen::Matrix3i step = Eigen::Matrix3i::Identity();
      step(2, 0) = 1;
      step(2, 1) = 1;
      apply(total, step);
      continue;
    }
    break;
  }

  NiggliResult out;
  out.iterations = iter;
  out.transform = total;
  out.params.a = std::sqrt(g.A);
  out.params.b = std::sqrt(g.B);
  out.params.c = std::sqrt(g.C);
  auto deg = [](double cosv) { return std::acos(std::clamp(cosv, -1.0, 1.0)) / kDegToRad; };
  out.params.alpha = deg(g.xi / (2.0 * out.params.b * out.params.c));
  out.params.beta = deg(g.eta / (2.0 * out.params.a * out.params.c));
  out.params.gamma = deg(g.zeta / (2.0 * out.params.a * out.params.b));

  // Re-express coordinates: with L' = P L, fractional rows transform as
  // f' = f * P^-1 (atom rows times the inverse basis change). P is unimodular
  // with det +1 so the integer adjugate is the exact inverse.
  const Eigen::Matrix3i pinv_int = [&] {
    Eigen::Matrix3i adj;
    const Eigen::Matrix3i& t = total;
    adj(0, 0) = t(1, 1) * t(2, 2) - t(1, 2) * t(2, 1);
    adj(0, 1) = t(0, 2) * t(2, 1) - t(0, 1) * t(2, 2);
    adj(0, 2) = t(0, 1) * t(1, 2) - t(0, 2) * t(1, 1);
    adj(1, 0) = t(1, 2) * t(2, 0) - t(1, 0) * t(2, 2);
    adj(1, 1) = t(0, 0) * t(2, 2) - t(0, 2) * t(2, 0);
    adj(1, 2) = t(0, 2) * t(1, 0) - t(0, 0) * t(1, 2);
    adj(2, 0) = t(1, 0) * t(2, 1) - t(1, 1) * t(2, 0);
    adj(2, 1) = t(0, 1) * t(2, 0) - t(0, 0) * t(2, 1);
    adj(2, 2) = t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0);
    return adj;
  }();

  out.frac_coords.resize(frac.rows(), 3);
  const Mat3 pinv = pinv_int.cast<double>();
  for (Eigen::Index r = 0; r < frac.rows(); ++r) {
    const Vec3 f = frac.row(r);
    const Vec3 fp = pinv.transpose() * f; // row * P^-1 written column-wise
    for (int k = 0; k < 3; ++k) out.frac_coords(r, k) = wrap_unit(fp(k));
  }
  return out;
}

} // namespace cflow
