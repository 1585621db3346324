#include "coopgrid/conic/interior_point.h"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <algorithm>
#include <chrono>
#include <functional>
#include <memory>
#include <cmath>
#include <vector>

#include "conic/ldl.h"
#include "coopgrid/error.h"

namespace coopgrid::conic {
namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

// Tuning constants of the homogeneous embedding method.
constexpr double kStaticReg = 7e-8;
constexpr double kDynamicReg = 2e-7;
constexpr double kStepFraction = 0.99;
constexpr int kMaxRefinement = 9;
constexpr double kMinStep = 1e-10;

struct ConeLayout {
  int lp = 0;
  std::vector<int> soc_start;
  std::vector<int> soc_dim;
  int total = 0;
  int degree() const { return lp + static_cast<int>(soc_dim.size()); }
};

struct RowMap {
  int eq = -1;
  int g_lower = -1;
  int g_upper = -1;
};

struct StandardForm {
  int n = 0;
  int p = 0;
  int m = 0;
  SpMat A;
  SpMat G;
  Vec c;
  Vec b;
  Vec h;
  ConeLayout cones;
  std::vector<RowMap> row_map;
};

StandardForm to_standard_form(const ConicProgram& prog) {
  StandardForm sf;
  const int n = prog.num_vars();
  sf.n = n;
  std::vector<Triplet> a_trips;
  std::vector<Triplet> g_trips;
  std::vector<double> b;
  std::vector<double> h;

  auto add_eq = [&](const std::vector<Term>& terms, double rhs) {
    const int r = static_cast<int>(b.size());
    for (const Term& t : terms) a_trips.emplace_back(r, t.var, t.coef);
    b.push_back(rhs);
    return r;
  };
  auto add_le = [&](const std::vector<Term>& terms, double scale, double rhs) {
    const int r = static_cast<int>(h.size());
    for (const Term& t : terms) g_trips.emplace_back(r, t.var, scale * t.coef);
    h.push_back(rhs);
    return r;
  };

  for (int j = 0; j < n; ++j) {
    const std::vector<Term> unit{{j, 1.0}};
    if (prog.lower[j] == prog.upper[j]) {
      add_eq(unit, prog.lower[j]);
      continue;
    }
    if (std::isfinite(prog.lower[j])) add_le(unit, -1.0, -prog.lower[j]);
    if (std::isfinite(prog.upper[j])) add_le(unit, 1.0, prog.upper[j]);
  }
  sf.row_map.resize(prog.rows.size());
  for (std::size_t r = 0; r < prog.rows.size(); ++r) {
    const LinearRow& row = prog.rows[r];
    if (row.lower == row.upper) {
      sf.row_map[r].eq = add_eq(row.terms, row.lower);
      continue;
    }
    if (std::isfinite(row.lower)) {
      sf.row_map[r].g_lower = add_le(row.terms, -1.0, -row.lower);
    }
    if (std::isfinite(row.upper)) {
      sf.row_map[r].g_upper = add_le(row.terms, 1.0, row.upper);
    }
  }
  sf.cones.lp = static_cast<int>(h.size());
  auto open_block = [&](int dim) {
    sf.cones.soc_start.push_back(static_cast<int>(h.size()));
    sf.cones.soc_dim.push_back(dim);
  };
  for (const SecondOrderCone& k : prog.cones) {
    open_block(1 + static_cast<int>(k.tail.size()));
    g_trips.emplace_back(static_cast<int>(h.size()), k.head, -1.0);
    h.push_back(0.0);
    for (int v : k.tail) {
      g_trips.emplace_back(static_cast<int>(h.size()), v, -1.0);
      h.push_back(0.0);
    }
  }
  for (const RotatedCone& k : prog.rotated_cones) {
    open_block(2 + static_cast<int>(k.tail.size()));
    int r = static_cast<int>(h.size());
    g_trips.emplace_back(r, k.first, -1.0);
    g_trips.emplace_back(r, k.second, -1.0);
    h.push_back(0.0);
    ++r;
    g_trips.emplace_back(r, k.first, -1.0);
    g_trips.emplace_back(r, k.second, 1.0);
    h.push_back(0.0);
    for (int v : k.tail) {
      g_trips.emplace_back(static_cast<int>(h.size()), v, -std::sqrt(2.0));
      h.push_back(0.0);
    }
  }
  sf.cones.total = static_cast<int>(h.size());
  sf.p = static_cast<int>(b.size());
  sf.m = static_cast<int>(h.size());
  sf.A.resize(sf.p, n);
  sf.A.setFromTriplets(a_trips.begin(), a_trips.end());
  sf.A.prune(0.0);
  sf.G.resize(sf.m, n);
  sf.G.setFromTriplets(g_trips.begin(), g_trips.end());
  sf.G.prune(0.0);
  sf.c = Eigen::Map<const Vec>(prog.cost.data(), n);
  sf.b = Eigen::Map<const Vec>(b.data(), sf.p);
  sf.h = Eigen::Map<const Vec>(h.data(), sf.m);
  return sf;
}

struct Equilibration {
  Vec d;   // columns
  Vec ea;  // equality rows
  Vec eg;  // cone rows, constant on each second-order block
};

// Ruiz scaling of [A; G] that keeps each second-order block on one factor.
Equilibration equilibrate(StandardForm& sf) {
  Equilibration eq{Vec::Ones(sf.n), Vec::Ones(sf.p), Vec::Ones(sf.m)};
  auto clamp_scale = [](double norm) {
    if (norm < 1e-8) return 1.0;
    return std::clamp(1.0 / std::sqrt(norm), 1e-4, 1e4);
  };
  for (int iter = 0; iter < 15; ++iter) {
    Vec col(sf.n);
    col.setZero();
    Vec row_a = Vec::Zero(sf.p);
    Vec row_g = Vec::Zero(sf.m);
    for (int j = 0; j < sf.n; ++j) {
      for (SpMat::InnerIterator it(sf.A, j); it; ++it) {
        const double v = std::abs(it.value());
        col[j] = std::max(col[j], v);
        row_a[it.row()] = std::max(row_a[it.row()], v);
      }
      for (SpMat::InnerIterator it(sf.G, j); it; ++it) {
        const double v = std::abs(it.value());
        col[j] = std::max(col[j], v);
        row_g[it.row()] = std::max(row_g[it.row()], v);
      }
    }
    for (std::size_t k = 0; k < sf.cones.soc_dim.size(); ++k) {
      const int s = sf.cones.soc_start[k];
      const int q = sf.cones.soc_dim[k];
      const double mx = row_g.segment(s, q).maxCoeff();
      row_g.segment(s, q).setConstant(mx);
    }
    double worst = 0.0;
    for (int j = 0; j < sf.n; ++j) {
      if (col[j] > 0) worst = std::max(worst, std::abs(1.0 - col[j]));
    }
    for (int i = 0; i < sf.p; ++i) {
      if (row_a[i] > 0) worst = std::max(worst, std::abs(1.0 - row_a[i]));
    }
    for (int i = 0; i < sf.m; ++i) {
      if (row_g[i] > 0) worst = std::max(worst, std::abs(1.0 - row_g[i]));
    }
    if (worst < 1e-2) break;
    Vec dj(sf.n);
    for (int j = 0; j < sf.n; ++j) dj[j] = clamp_scale(col[j]);
    Vec ei(sf.p);
    for (int i = 0; i < sf.p; ++i) ei[i] = clamp_scale(row_a[i]);
    Vec gi(sf.m);
    for (int i = 0; i < sf.m; ++i) gi[i] = clamp_scale(row_g[i]);
    sf.A = ei.asDiagonal() * sf.A * dj.asDiagonal();
    sf.G = gi.asDiagonal() * sf.G * dj.asDiagonal();
    eq.d.array() *= dj.array();
    eq.ea.array() *= ei.array();
    eq.eg.array() *= gi.array();
  }
  sf.c.array() *= eq.d.array();
  sf.b.array() *= eq.ea.array();
  sf.h.array() *= eq.eg.array();
  return eq;
}

// Nesterov-Todd scaling point for the product cone.
struct Scaling {
  Vec lp_w;                     // sqrt(s/z)
  std::vector<double> eta;      // per second-order block
  std::vector<Vec> wbar;        // normalized scaling point
};

class ConeOps {
 public:
  explicit ConeOps(const ConeLayout& cones) : cones_(cones) {}

  // Largest alpha with u + alpha * du in the cone (capped at a big number).
  double max_step(const Vec& u, const Vec& du) const {
    double alpha = 1e30;
    for (int i = 0; i < cones_.lp; ++i) {
      if (du[i] < 0) alpha = std::min(alpha, -u[i] / du[i]);
    }
    for (std::size_t k = 0; k < cones_.soc_dim.size(); ++k) {
      const int s = cones_.soc_start[k];
      const int q = cones_.soc_dim[k];
      const double u0 = u[s];
      const double d0 = du[s];
      const auto u1 = u.segment(s + 1, q - 1);
      const auto d1 = du.segment(s + 1, q - 1);
      const double a = d0 * d0 - d1.squaredNorm();
      const double bb = u0 * d0 - u1.dot(d1);
      const double c = std::max(u0 * u0 - u1.squaredNorm(), 0.0);
      double root = 1e30;
      if (std::abs(a) < 1e-14 * std::max(1.0, std::abs(bb))) {
        if (bb < 0) root = -c / (2.0 * bb);
      } else {
        const double disc = bb * bb - a * c;
        if (disc >= 0) {
          const double sq = std::sqrt(disc);
          const double qv = -(bb + std::copysign(sq, bb));
          double r1 = (qv != 0.0) ? qv / a : 1e30;
          double r2 = (qv != 0.0) ? c / qv : 1e30;
          if (r1 > 0) root = std::min(root, r1);
          if (r2 > 0) root = std::min(root, r2);
        }
      }
      // Leaving through the apex also requires the head to stay positive.
      if (d0 < 0) root = std::min(root, -u0 / d0);
      alpha = std::min(alpha, root);
    }
    return alpha;
  }

  // Smallest t with u + t * e in the cone (negative when u is interior).
  double violation(const Vec& u) const {
    double worst = -1e30;
    for (int i = 0; i < cones_.lp; ++i) worst = std::max(worst, -u[i]);
    for (std::size_t k = 0; k < cones_.soc_dim.size(); ++k) {
      const int s = cones_.soc_start[k];
      const int q = cones_.soc_dim[k];
      worst = std::max(worst, u.segment(s + 1, q - 1).norm() - u[s]);
    }
    return worst;
  }

  void add_identity(Vec& u, double t) const {
    for (int i = 0; i < cones_.lp; ++i) u[i] += t;
    for (int s : cones_.soc_start) u[s] += t;
  }

  Vec identity() const {
    Vec e = Vec::Zero(cones_.total);
    add_identity(e, 1.0);
    return e;
  }

  Scaling nt_scaling(const Vec& s, const Vec& z) const {
    Scaling w;
    w.lp_w.resize(cones_.lp);
    for (int i = 0; i < cones_.lp; ++i) w.lp_w[i] = std::sqrt(s[i] / z[i]);
    for (std::size_t k = 0; k < cones_.soc_dim.size(); ++k) {
      const int st = cones_.soc_start[k];
      const int q = cones_.soc_dim[k];
      const Vec sk = s.segment(st, q);
      const Vec zk = z.segment(st, q);
      const double s_res =
          std::max(sk[0] * sk[0] - sk.tail(q - 1).squaredNorm(), 1e-300);
      const double z_res =
          std::max(zk[0] * zk[0] - zk.tail(q - 1).squaredNorm(), 1e-300);
      const double s_nrm = std::sqrt(s_res);
      const double z_nrm = std::sqrt(z_res);
      const Vec sb = sk / s_nrm;
      const Vec zb = zk / z_nrm;
      const double gamma = std::sqrt(std::max((1.0 + sb.dot(zb)) / 2.0, 1e-300));
      Vec wb(q);
      wb[0] = (sb[0] + zb[0]) / (2.0 * gamma);
      wb.tail(q - 1) = (sb.tail(q - 1) - zb.tail(q - 1)) / (2.0 * gamma);
      w.eta.push_back(std::sqrt(s_nrm / z_nrm));
      w.wbar.push_back(std::move(wb));
    }
    return w;
  }

  Vec apply_w(const Scaling& w, const Vec& v) const { return apply(w, v, false); }
  Vec apply_winv(const Scaling& w, const Vec& v) const { return apply(w, v, true); }

  Vec apply_w2(const Scaling& w, const Vec& v) const {
    return apply_w(w, apply_w(w, v));
  }

  // Dense W^2 for block k: eta^2 (2 wbar wbar' - J).
  Eigen::MatrixXd block_w2(const Scaling& w, std::size_t k) const {
    const Vec& wb = w.wbar[k];
    const int q = static_cast<int>(wb.size());
    Eigen::MatrixXd m = 2.0 * wb * wb.transpose();
    m(0, 0) -= 1.0;
    for (int i = 1; i < q; ++i) m(i, i) += 1.0;
    return w.eta[k] * w.eta[k] * m;
  }

  Vec jordan_product(const Vec& u, const Vec& v) const {
    Vec out(cones_.total);
    for (int i = 0; i < cones_.lp; ++i) out[i] = u[i] * v[i];
    for (std::size_t k = 0; k < cones_.soc_dim.size(); ++k) {
      const int s = cones_.soc_start[k];
      const int q = cones_.soc_dim[k];
      out[s] = u.segment(s, q).dot(v.segment(s, q));
      out.segment(s + 1, q - 1) =
          u[s] * v.segment(s + 1, q - 1) + v[s] * u.segment(s + 1, q - 1);
    }
    return out;
  }

  // Solves lambda o x = r for x.
  Vec jordan_divide(const Vec& lambda, const Vec& r) const {
    Vec out(cones_.total);
    for (int i = 0; i < cones_.lp; ++i) out[i] = r[i] / lambda[i];
    for (std::size_t k = 0; k < cones_.soc_dim.size(); ++k) {
      const int s = cones_.soc_start[k];
      const int q = cones_.soc_dim[k];
      const double l0 = lambda[s];
      const auto l1 = lambda.segment(s + 1, q - 1);
      const double det = l0 * l0 - l1.squaredNorm();
      const double x0 = (l0 * r[s] - l1.dot(r.segment(s + 1, q - 1))) / det;
      out[s] = x0;
      out.segment(s + 1, q - 1) = (r.segment(s + 1, q - 1) - x0 * l1) / l0;
    }
    return out;
  }

 private:
  Vec apply(const Scaling& w, const Vec& v, bool inverse) const {
    Vec out(cones_.total);
    for (int i = 0; i < cones_.lp; ++i) {
      out[i] = inverse ? v[i] / w.lp_w[i] : v[i] * w.lp_w[i];
    }
    for (std::size_t k = 0; k < cones_.soc_dim.size(); ++k) {
      const int s = cones_.soc_start[k];
      const int q = cones_.soc_dim[k];
      const Vec& wb = w.wbar[k];
      const double w0 = wb[0];
      const auto w1 = wb.tail(q - 1);
      const double sign = inverse ? -1.0 : 1.0;
      const double scale = inverse ? 1.0 / w.eta[k] : w.eta[k];
      const double v0 = v[s];
      const auto v1 = v.segment(s + 1, q - 1);
      const double w1v1 = w1.dot(v1);
      out[s] = scale * (w0 * v0 + sign * w1v1);
      out.segment(s + 1, q - 1) =
          scale * (sign * v0 * w1 + v1 + (w1v1 / (1.0 + w0)) * w1);
    }
    return out;
  }

  const ConeLayout& cones_;
};

// KKT system [0 A' G'; A 0 0; G 0 -W^2] with static regularization on the
// factorization and iterative refinement against the unregularized matrix.
class KktSolver {
 public:
  KktSolver(const StandardForm& sf, const ConeOps& ops)
      : sf_(sf), ops_(ops), n_(sf.n), p_(sf.p), m_(sf.m) {
    std::vector<int> signs(n_ + p_ + m_, -1);
    for (int j = 0; j < n_; ++j) signs[j] = 1;
    for (int j = 0; j < n_; ++j) entries_.push_back({j, j});
    for (int j = 0; j < n_; ++j) {
      for (SpMat::InnerIterator it(sf.A, j); it; ++it) {
        entries_.push_back({n_ + static_cast<int>(it.row()), j});
      }
    }
    for (int i = 0; i < p_; ++i) entries_.push_back({n_ + i, n_ + i});
    for (int j = 0; j < n_; ++j) {
      for (SpMat::InnerIterator it(sf.G, j); it; ++it) {
        entries_.push_back({n_ + p_ + static_cast<int>(it.row()), j});
      }
    }
    z_begin_ = static_cast<int>(entries_.size());
    const int zo = n_ + p_;
    for (int i = 0; i < sf.cones.lp; ++i) entries_.push_back({zo + i, zo + i});
    for (std::size_t k = 0; k < sf.cones.soc_dim.size(); ++k) {
      const int s = sf.cones.soc_start[k];
      const int q = sf.cones.soc_dim[k];
      for (int a = 0; a < q; ++a) {
        for (int b = 0; b <= a; ++b) entries_.push_back({zo + s + a, zo + s + b});
      }
    }
    values_.assign(entries_.size(), 0.0);
    std::size_t pos = 0;
    for (int j = 0; j < n_; ++j) values_[pos++] = kStaticReg;
    for (int j = 0; j < n_; ++j) {
      for (SpMat::InnerIterator it(sf.A, j); it; ++it) values_[pos++] = it.value();
    }
    for (int i = 0; i < p_; ++i) values_[pos++] = -kStaticReg;
    for (int j = 0; j < n_; ++j) {
      for (SpMat::InnerIterator it(sf.G, j); it; ++it) values_[pos++] = it.value();
    }
    ldl_ = std::make_unique<internal::QuasiDefiniteLdl>(n_ + p_ + m_, entries_,
                                                        std::move(signs));
  }

  void update(const Scaling& w) {
    w_ = &w;
    std::size_t pos = z_begin_;
    for (int i = 0; i < sf_.cones.lp; ++i) {
      values_[pos++] = -(w.lp_w[i] * w.lp_w[i]) - kStaticReg;
    }
    for (std::size_t k = 0; k < sf_.cones.soc_dim.size(); ++k) {
      const Eigen::MatrixXd w2 = ops_.block_w2(w, k);
      const int q = sf_.cones.soc_dim[k];
      for (int a = 0; a < q; ++a) {
        for (int b = 0; b <= a; ++b) {
          values_[pos++] = -w2(a, b) - (a == b ? kStaticReg : 0.0);
        }
      }
    }
    ldl_->factor(values_, kDynamicReg);
  }

  // Unit scaling (W = I) used by the initialization.
  void update_identity() {
    identity_.lp_w = Vec::Ones(sf_.cones.lp);
    identity_.eta.assign(sf_.cones.soc_dim.size(), 1.0);
    identity_.wbar.clear();
    for (int q : sf_.cones.soc_dim) {
      Vec e = Vec::Zero(q);
      e[0] = 1.0;
      identity_.wbar.push_back(e);
    }
    update(identity_);
  }

  Vec solve(const Vec& rhs) const {
    Vec sol = rhs;
    ldl_->solve(std::span<double>(sol.data(), sol.size()));
    const double rhs_norm = rhs.lpNorm<Eigen::Infinity>();
    double prev = 1e300;
    for (int it = 0; it < kMaxRefinement; ++it) {
      Vec err = rhs - apply(sol);
      const double e = err.lpNorm<Eigen::Infinity>();
      if (e <= 1e-14 * (1.0 + rhs_norm) || e > prev / 2.0) break;
      prev = e;
      ldl_->solve(std::span<double>(err.data(), err.size()));
      sol += err;
    }
    return sol;
  }

 private:
  Vec apply(const Vec& d) const {
    const Vec dx = d.head(n_);
    const Vec dy = d.segment(n_, p_);
    const Vec dz = d.tail(m_);
    Vec out(n_ + p_ + m_);
    out.head(n_) = sf_.A.transpose() * dy + sf_.G.transpose() * dz;
    out.segment(n_, p_) = sf_.A * dx;
    out.tail(m_) = sf_.G * dx - ops_.apply_w2(*w_, dz);
    return out;
  }

  const StandardForm& sf_;
  const ConeOps& ops_;
  int n_, p_, m_;
  std::vector<internal::KktEntry> entries_;
  std::vector<double> values_;
  std::size_t z_begin_ = 0;
  std::unique_ptr<internal::QuasiDefiniteLdl> ldl_;
  const Scaling* w_ = nullptr;
  Scaling identity_;
};

struct Iterate {
  Vec x, y, z, s;
  double tau = 1.0;
  double kappa = 1.0;
};

struct Metrics {
  double pres = 1e300;
  double dres = 1e300;
  double gap = 1e300;
  double relgap = 1e300;
};

struct Direction {
  Vec dx, dy, dz, ds;
  double dtau = 0.0;
  double dkappa = 0.0;
};

class HomogeneousIpm {
 public:
  // violation(x, tau) measures the recovered point x / tau on the original
  // program.
  HomogeneousIpm(const StandardForm& sf, const Equilibration& eq,
                 const SolverConfig& cfg,
                 std::function<double(const Vec&, double)> violation)
      : sf_(sf),
        eq_(eq),
        cfg_(cfg),
        ops_(sf.cones),
        kkt_(sf, ops_),
        violation_(std::move(violation)) {
    // Norms of the unscaled data for relative residuals.
    b_norm_ = (sf.b.array() / eq.ea.array()).matrix().norm();
    h_norm_ = (sf.h.array() / eq.eg.array()).matrix().norm();
    c_norm_ = (sf.c.array() / eq.d.array()).matrix().norm();
  }

  SolveStatus run(Iterate& it, SolverStats& stats) {
    initialize(it);
    const int n = sf_.n;
    const int p = sf_.p;
    const double degree = sf_.cones.degree();
    const double ftol = cfg_.feas_tol;
    Iterate best = it;
    double best_merit = 1e300;
    Metrics best_metrics;
    double last_alpha = 1.0;
    for (int iter = 0;; ++iter) {
      stats.iterations = iter;
      const Vec rx = sf_.A.transpose() * it.y + sf_.G.transpose() * it.z +
                     sf_.c * it.tau;
      const Vec ry = sf_.A * it.x - sf_.b * it.tau;
      const Vec rz = sf_.G * it.x + it.s - sf_.h * it.tau;
      const double cx = sf_.c.dot(it.x);
      const double by = sf_.b.dot(it.y);
      const double hz = sf_.h.dot(it.z);
      const double rt = it.kappa + cx + by + hz;
      const double sz = it.s.dot(it.z);
      const double mu = (sz + it.tau * it.kappa) / (degree + 1.0);

      // Convergence tests on unscaled quantities.
      Metrics mt;
      mt.pres =
          std::max((ry.array() / eq_.ea.array()).matrix().norm() / (1.0 + b_norm_),
                   (rz.array() / eq_.eg.array()).matrix().norm() / (1.0 + h_norm_)) /
          it.tau;
      mt.dres =
          (rx.array() / eq_.d.array()).matrix().norm() / (1.0 + c_norm_) / it.tau;
      const double pcost = cx / it.tau;
      const double dcost = -(by + hz) / it.tau;
      mt.gap = sz / (it.tau * it.tau);
      mt.relgap = 1e300;
      if (pcost < 0) mt.relgap = mt.gap / -pcost;
      if (dcost > 0) mt.relgap = mt.gap / dcost;
      mt.relgap = std::min(mt.relgap, std::abs(pcost - dcost) /
                                          std::max(1.0, std::min(std::abs(pcost),
                                                                 std::abs(dcost))));
      const bool finite = std::isfinite(mt.pres) && std::isfinite(mt.dres) &&
                          std::isfinite(mt.gap) && std::isfinite(mu) &&
                          it.tau > 0;
      if (!finite || last_alpha < kMinStep) {
        it = best;
        record(best_metrics, stats);
        return near_optimal(best, best_metrics) ? SolveStatus::kOptimal
                                                : SolveStatus::kNumericalFailure;
      }
      record(mt, stats);
      const double merit = std::max({mt.pres / ftol, mt.dres / ftol,
                                     std::min(mt.gap / cfg_.abs_tol,
                                              mt.relgap / cfg_.rel_tol)});
      if (merit < best_merit) {
        best_merit = merit;
        best = it;
        best_metrics = mt;
      }

      if (mt.pres < ftol && mt.dres < ftol &&
          (mt.gap < cfg_.abs_tol || mt.relgap < cfg_.rel_tol) &&
          violation_(it.x, it.tau) <= cfg_.feas_tol) {
        return SolveStatus::kOptimal;
      }
      // Infeasibility certificates (unscaled norms of the homogeneous parts).
      if (by + hz < 0) {
        const Vec hx = sf_.A.transpose() * it.y + sf_.G.transpose() * it.z;
        const double hres = (hx.array() / eq_.d.array()).matrix().norm();
        if (hres / -(by + hz) < cfg_.feas_tol) return SolveStatus::kInfeasible;
      }
      if (cx < 0) {
        const Vec ax = sf_.A * it.x;
        const Vec gx = sf_.G * it.x + it.s;
        const double hres =
            std::max((ax.array() / eq_.ea.array()).matrix().norm(),
                     (gx.array() / eq_.eg.array()).matrix().norm());
        if (hres / -cx < cfg_.feas_tol) return SolveStatus::kUnbounded;
      }
      if (iter >= cfg_.max_iterations) {
        if (near_optimal(best, best_metrics)) {
          it = best;
          record(best_metrics, stats);
          return SolveStatus::kOptimal;
        }
        return SolveStatus::kIterLimit;
      }

      const Scaling w = ops_.nt_scaling(it.s, it.z);
      kkt_.update(w);
      const Vec lambda = ops_.apply_w(w, it.z);

      Vec rhs1(n + p + sf_.m);
      rhs1 << -sf_.c, sf_.b, sf_.h;
      const Vec u1 = kkt_.solve(rhs1);
      const double denom = sf_.c.dot(u1.head(n)) + sf_.b.dot(u1.segment(n, p)) +
                           sf_.h.dot(u1.tail(sf_.m)) - it.kappa / it.tau;

      auto direction = [&](double eta, const Vec& rc, double rtk) {
        const Vec lam_div = ops_.jordan_divide(lambda, rc);
        const Vec w_lam_div = ops_.apply_w(w, lam_div);
        Vec rhs2(n + p + sf_.m);
        rhs2 << -eta * rx, -eta * ry, -eta * rz - w_lam_div;
        const Vec u2 = kkt_.solve(rhs2);
        Direction d;
        d.dtau = (-eta * rt - rtk / it.tau -
                  (sf_.c.dot(u2.head(n)) + sf_.b.dot(u2.segment(n, p)) +
                   sf_.h.dot(u2.tail(sf_.m)))) /
                 denom;
        const Vec full = u2 + d.dtau * u1;
        d.dx = full.head(n);
        d.dy = full.segment(n, p);
        d.dz = full.tail(sf_.m);
        d.ds = w_lam_div - ops_.apply_w2(w, d.dz);
        d.dkappa = (rtk - it.kappa * d.dtau) / it.tau;
        return d;
      };
      auto step_to_boundary = [&](const Direction& d) {
        double a = std::min(ops_.max_step(it.s, d.ds), ops_.max_step(it.z, d.dz));
        if (d.dtau < 0) a = std::min(a, -it.tau / d.dtau);
        if (d.dkappa < 0) a = std::min(a, -it.kappa / d.dkappa);
        return a;
      };

      // Predictor.
      const Vec rc_aff = -ops_.jordan_product(lambda, lambda);
      const Direction aff = direction(1.0, rc_aff, -it.tau * it.kappa);
      const double alpha_aff = std::min(1.0, step_to_boundary(aff));
      const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

      // Corrector.
      const Vec ds_scaled = ops_.apply_winv(w, aff.ds);
      const Vec dz_scaled = ops_.apply_w(w, aff.dz);
      Vec rc = rc_aff - ops_.jordan_product(ds_scaled, dz_scaled);
      ops_.add_identity(rc, sigma * mu);
      const double rtk =
          -it.tau * it.kappa - aff.dtau * aff.dkappa + sigma * mu;
      const Direction d = direction(1.0 - sigma, rc, rtk);
      const double alpha = std::min(1.0, kStepFraction * step_to_boundary(d));
      last_alpha = alpha;

      it.x += alpha * d.dx;
      it.y += alpha * d.dy;
      it.z += alpha * d.dz;
      it.s += alpha * d.ds;
      it.tau += alpha * d.dtau;
      it.kappa += alpha * d.dkappa;
    }
  }

 private:
  // Accepts a stalled iterate whose recovered point meets feas_tol and whose
  // gap is within a decade of the tolerances.
  bool near_optimal(const Iterate& it, const Metrics& mt) const {
    return mt.pres < 1e3 * cfg_.feas_tol && mt.dres < 10 * cfg_.feas_tol &&
           (mt.gap < 10 * cfg_.abs_tol || mt.relgap < 10 * cfg_.rel_tol) &&
           violation_(it.x, it.tau) <= cfg_.feas_tol;
  }

  static void record(const Metrics& mt, SolverStats& stats) {
    stats.primal_residual = mt.pres;
    stats.dual_residual = mt.dres;
    stats.gap = mt.gap;
  }

  void initialize(Iterate& it) {
    const int n = sf_.n;
    const int p = sf_.p;
    const int m = sf_.m;
    kkt_.update_identity();
    Vec rhs(n + p + m);
    rhs << Vec::Zero(n), sf_.b, sf_.h;
    Vec sol = kkt_.solve(rhs);
    it.x = sol.head(n);
    it.s = -sol.tail(m);
    bring_to_cone(it.s);
    rhs << -sf_.c, Vec::Zero(p), Vec::Zero(m);
    sol = kkt_.solve(rhs);
    it.y = sol.segment(n, p);
    it.z = sol.tail(m);
    bring_to_cone(it.z);
    it.tau = 1.0;
    it.kappa = 1.0;
  }

  void bring_to_cone(Vec& u) const {
    const double alpha = ops_.violation(u);
    if (alpha >= -1e-8) ops_.add_identity(u, 1.0 + alpha);
  }

  const StandardForm& sf_;
  const Equilibration& eq_;
  const SolverConfig& cfg_;
  ConeOps ops_;
  KktSolver kkt_;
  double b_norm_ = 0.0;
  double h_norm_ = 0.0;
  double c_norm_ = 0.0;
  std::function<double(const Vec&, double)> violation_;
};

}  // namespace

Solution InteriorPointSolver::solve(const ConicProgram& prog,
                                    const SolverConfig& cfg) const {
  const auto start = std::chrono::steady_clock::now();
  prog.check();
  Solution sol;
  const int n = prog.num_vars();
  sol.row_duals.assign(prog.rows.size(), 0.0);

  StandardForm sf = to_standard_form(prog);
  if (sf.m == 0 && sf.p == 0) {
    // Only free variables: bounded iff the objective vanishes.
    sol.x.assign(n, 0.0);
    const bool flat = std::all_of(prog.cost.begin(), prog.cost.end(),
                                  [](double c) { return c == 0.0; });
    sol.status = flat ? SolveStatus::kOptimal : SolveStatus::kUnbounded;
    sol.objective = flat ? prog.objective_offset : -kInf;
    return sol;
  }
  if (sf.m == 0) {
    // The embedding needs at least one cone coordinate; add a slack row
    // 0 <= 1 that does not change the problem.
    sf.G.conservativeResize(1, sf.n);
    sf.h = Vec::Ones(1);
    sf.m = 1;
    sf.cones.lp = 1;
    sf.cones.total = 1;
  }
  const Equilibration eq = equilibrate(sf);
  Iterate it;
  auto recover = [&](const Vec& xs, double tau, std::vector<double>& x) {
    for (int j = 0; j < n; ++j) {
      x[j] = std::clamp(eq.d[j] * xs[j] / tau, prog.lower[j], prog.upper[j]);
    }
  };
  std::vector<double> probe(n);
  HomogeneousIpm ipm(sf, eq, cfg, [&](const Vec& xs, double tau) {
    recover(xs, tau, probe);
    return prog.max_violation(probe);
  });
  sol.status = ipm.run(it, sol.stats);

  const double tau = it.tau;
  sol.x.resize(n);
  if (sol.status == SolveStatus::kUnbounded) {
    // Report the recession direction.
    for (int j = 0; j < n; ++j) sol.x[j] = eq.d[j] * it.x[j];
  } else {
    recover(it.x, tau, sol.x);
    for (std::size_t r = 0; r < prog.rows.size(); ++r) {
      const RowMap& rm = sf.row_map[r];
      double dual = 0.0;
      if (rm.eq >= 0) dual -= eq.ea[rm.eq] * it.y[rm.eq] / tau;
      if (rm.g_lower >= 0) dual += eq.eg[rm.g_lower] * it.z[rm.g_lower] / tau;
      if (rm.g_upper >= 0) dual -= eq.eg[rm.g_upper] * it.z[rm.g_upper] / tau;
      sol.row_duals[r] = dual;
    }
  }
  if (sol.status == SolveStatus::kOptimal) {
    sol.objective = prog.objective_value(sol.x);
  } else if (sol.status == SolveStatus::kInfeasible) {
    sol.objective = kInf;
  } else if (sol.status == SolveStatus::kUnbounded) {
    sol.objective = -kInf;
  } else {
    sol.objective = prog.objective_value(sol.x);
  }
  sol.stats.seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return sol;
}

const ContinuousSolver& default_continuous_solver() {
  static const InteriorPointSolver solver;
  return solver;
}

Solution solve_continuous(const ConicProgram& program, const SolverConfig& cfg,
                          const ContinuousSolver* backend) {
  const ContinuousSolver& solver =
      backend ? *backend : default_continuous_solver();
  return solver.solve(program, cfg);
}

}  // namespace coopgrid::conic
