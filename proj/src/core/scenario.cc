#include "coopgrid/core/scenario.h"

#include <cmath>
#include <cstring>
#include <sstream>

#include "coopgrid/uncertainty/sets.h"

namespace coopgrid {

int Scenario::num_drgs() const {
  int d = 0;
  for (const ProsumerSpec& p : prosumers) d += static_cast<int>(p.drgs.size());
  return d;
}

int Scenario::drg_index(int i, int w) const {
  int d = 0;
  for (int k = 0; k < i; ++k) d += static_cast<int>(prosumers[k].drgs.size());
  return d + w;
}

void ValidationReport::raise() const {
  if (errors.empty()) return;
  throw Error(errors.front().code, errors.front().message);
}

namespace {

class Checker {
 public:
  explicit Checker(ValidationReport& r, int t) : r_(r), t_(t) {}

  void add(ErrorCode code, const std::string& msg) { r_.errors.push_back({code, msg}); }

  // Length T, finite, and >= 0 when asked.
  bool series(const std::vector<double>& v, const std::string& name,
              bool nonnegative) {
    if (static_cast<int>(v.size()) != t_) {
      add(ErrorCode::kDimensionMismatch, name + " has " + std::to_string(v.size()) +
                                             " entries, expected " +
                                             std::to_string(t_));
      return false;
    }
    for (int t = 0; t < t_; ++t) {
      if (!std::isfinite(v[t])) {
        add(ErrorCode::kInvalidValue, name + "[" + std::to_string(t) + "] is not finite");
        return false;
      }
      if (nonnegative && v[t] < 0) {
        add(ErrorCode::kInvalidValue, name + "[" + std::to_string(t) + "] is negative");
        return false;
      }
    }
    return true;
  }

  void scalar(double v, const std::string& name) {
    if (!std::isfinite(v) || v < 0) {
      add(ErrorCode::kInvalidValue, name + " must be finite and >= 0");
    }
  }

 private:
  ValidationReport& r_;
  int t_;
};

}  // namespace

ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport report;
  const int T = s.grid.periods;
  const int n = s.num_players();
  if (T < 1) {
    report.errors.push_back({ErrorCode::kInvalidValue, "horizon must be >= 1"});
    return report;
  }
  if (!(s.grid.period_hours > 0)) {
    report.errors.push_back({ErrorCode::kInvalidValue, "period length must be > 0"});
  }
  if (n < 1) {
    report.errors.push_back({ErrorCode::kInvalidValue, "no prosumers"});
    return report;
  }
  if (n > kMaxPlayers) {
    report.errors.push_back({ErrorCode::kTooManyPlayers,
                             std::to_string(n) + " prosumers exceed " +
                                 std::to_string(kMaxPlayers)});
    return report;
  }
  Checker ck(report, T);
  for (int i = 0; i < n; ++i) {
    const ProsumerSpec& p = s.prosumers[i];
    const std::string who = "prosumer " + std::to_string(i);
    const bool lo = ck.series(p.pd_min, who + " pd_min", true);
    const bool hi = ck.series(p.pd_max, who + " pd_max", true);
    if (lo && hi) {
      for (int t = 0; t < T; ++t) {
        if (p.pd_min[t] > p.pd_max[t]) {
          ck.add(ErrorCode::kBoundsInverted,
                 who + " pd_min > pd_max at period " + std::to_string(t));
          break;
        }
      }
    }
    ck.series(p.lambda, who + " lambda", false);
    ck.series(p.beta, who + " beta", true);
    ck.series(p.pi_d_up, who + " pi_d_up", true);
    ck.series(p.pi_d_dw, who + " pi_d_dw", true);
    if (std::isnan(p.exchange_cap) || p.exchange_cap < 0) {
      ck.add(ErrorCode::kInvalidValue, who + " exchange cap must be >= 0");
    }
    for (std::size_t m = 0; m < p.machines.size(); ++m) {
      const MachineSpec& g = p.machines[m];
      const std::string mt = who + " machine " + std::to_string(m);
      ck.scalar(g.pg_max, mt + " pg_max");
      ck.scalar(g.a, mt + " a");
      if (!std::isfinite(g.b) || !std::isfinite(g.c)) {
        ck.add(ErrorCode::kInvalidValue, mt + " cost coefficients must be finite");
      }
      ck.series(g.pi_g_up, mt + " pi_g_up", true);
      ck.series(g.pi_g_dw, mt + " pi_g_dw", true);
    }
    for (std::size_t w = 0; w < p.drgs.size(); ++w) {
      const std::string drg = who + " drg " + std::to_string(w);
      ck.series(p.drgs[w].pw0, drg + " pw0", true);
      ck.series(p.drgs[w].dpw_max, drg + " dpw_max", true);
    }
  }

  const TariffSchedule& tf = s.tariff;
  const bool buy = ck.series(tf.pi_buy, "tariff pi_buy", true);
  const bool sell = ck.series(tf.pi_sell, "tariff pi_sell", true);
  ck.series(tf.pi_m_up, "tariff pi_m_up", true);
  ck.series(tf.pi_m_dw, "tariff pi_m_dw", true);
  if (buy && sell) {
    for (int t = 0; t < T; ++t) {
      if (tf.pi_sell[t] > tf.pi_buy[t]) {
        ck.add(ErrorCode::kTariffArbitrage,
               "pi_sell > pi_buy at period " + std::to_string(t));
        break;
      }
    }
  }

  const int d = s.num_drgs();
  const UncertaintyModel& u = s.uncertainty;
  if (u.ellipsoid) {
    const int blocks = u.scope == BudgetScope::kPerPeriod ? T : 1;
    const int dim = u.scope == BudgetScope::kPerPeriod ? d : d * T;
    if (static_cast<int>(u.shapes.size()) != blocks ||
        static_cast<int>(u.centers.size()) != blocks) {
      ck.add(ErrorCode::kDimensionMismatch,
             "uncertainty needs " + std::to_string(blocks) + " shape/center blocks");
    } else if (dim > 0) {
      for (int b = 0; b < blocks; ++b) {
        const std::string blk = "uncertainty block " + std::to_string(b);
        if (u.centers[b].size() != dim || u.shapes[b].rows() != dim ||
            u.shapes[b].cols() != dim) {
          ck.add(ErrorCode::kDimensionMismatch,
                 blk + " must have dimension " + std::to_string(dim));
          continue;
        }
        if (!u.centers[b].allFinite() || !u.shapes[b].allFinite()) {
          ck.add(ErrorCode::kInvalidValue, blk + " has non-finite entries");
          continue;
        }
        try {
          uncertainty::EllipsoidSet(u.centers[b], u.shapes[b], 1.0);
        } catch (const Error& e) {
          ck.add(ErrorCode::kNonPositiveDefiniteShape, blk + ": " + e.what());
        }
      }
    }
  }

  const uncertainty::DataContribution& dc = s.contributions;
  if (!std::isfinite(dc.k_h) || !(dc.k_h > 0)) {
    ck.add(ErrorCode::kEmptyBudget, "historical budget k_h must be > 0");
  }
  bool terms_ok = true;
  for (const uncertainty::ContributionTerm& t : dc.terms) {
    if (t.key.empty() || !t.key.subset_of(Coalition::grand(n))) {
      ck.add(ErrorCode::kInvalidValue, "contribution key " + t.key.to_string() +
                                           " is empty or names unknown prosumers");
      terms_ok = false;
    }
    if (!std::isfinite(t.k) || t.k < 0) {
      ck.add(ErrorCode::kInvalidValue, "contribution k must be finite and >= 0");
      terms_ok = false;
    }
  }
  if (terms_ok && std::isfinite(dc.k_h)) {
    const double smallest = dc.k_h - dc.total();
    if (!(smallest > 0)) {
      std::ostringstream os;
      os << "k_h - sum of contributions = " << smallest << " <= 0";
      ck.add(ErrorCode::kEmptyBudget, os.str());
    }
  }
  if (static_cast<int>(dc.terms.size()) > 2 * n) {
    report.warnings.push_back(std::to_string(dc.terms.size()) +
                              " contribution terms exceed 2N = " +
                              std::to_string(2 * n));
  }
  try {
    s.config.solver.check();
  } catch (const Error& e) {
    ck.add(ErrorCode::kInvalidValue, e.what());
  }
  if (s.config.verify_samples < 1) {
    ck.add(ErrorCode::kInvalidValue, "verify_samples must be >= 1");
  }
  for (double m : s.config.sweep_multipliers) {
    if (!(m > 0) || !std::isfinite(m)) {
      ck.add(ErrorCode::kInvalidValue, "sweep multipliers must be > 0");
      break;
    }
  }
  return report;
}

void require_valid(const Scenario& s) { validate_scenario(s).raise(); }

namespace {

class Hasher {
 public:
  void add(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    add_bits(bits);
  }
  void add_bits(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) {
      h_ ^= (v >> (8 * k)) & 0xff;
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(const std::vector<double>& v) {
    add_bits(v.size());
    for (double x : v) add(x);
  }
  void add(const Eigen::MatrixXd& m) {
    add_bits(m.rows());
    add_bits(m.cols());
    for (long i = 0; i < m.size(); ++i) add(m.data()[i]);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t scenario_fingerprint(const Scenario& s) {
  Hasher h;
  h.add_bits(s.grid.periods);
  h.add(s.grid.period_hours);
  h.add_bits(s.prosumers.size());
  for (const ProsumerSpec& p : s.prosumers) {
    for (const auto* v : {&p.pd_min, &p.pd_max, &p.lambda, &p.beta, &p.pi_d_up,
                          &p.pi_d_dw}) {
      h.add(*v);
    }
    h.add(p.exchange_cap);
    h.add_bits(p.machines.size());
    for (const MachineSpec& g : p.machines) {
      h.add(g.pg_max);
      h.add(g.a);
      h.add(g.b);
      h.add(g.c);
      h.add(g.pi_g_up);
      h.add(g.pi_g_dw);
    }
    h.add_bits(p.drgs.size());
    for (const DrgSpec& w : p.drgs) {
      h.add(w.pw0);
      h.add(w.dpw_max);
    }
  }
  h.add(s.tariff.pi_buy);
  h.add(s.tariff.pi_sell);
  h.add(s.tariff.pi_m_up);
  h.add(s.tariff.pi_m_dw);
  h.add_bits(s.uncertainty.ellipsoid);
  h.add_bits(static_cast<std::uint64_t>(s.uncertainty.scope));
  for (const Eigen::VectorXd& c : s.uncertainty.centers) h.add(Eigen::MatrixXd(c));
  for (const Eigen::MatrixXd& q : s.uncertainty.shapes) h.add(q);
  h.add(s.contributions.k_h);
  for (const auto& t : s.contributions.terms) {
    h.add_bits(t.key.mask());
    h.add(t.k);
  }
  h.add_bits(static_cast<std::uint64_t>(s.config.electricity_only_set));
  h.add_bits(s.config.per_period_shares);
  h.add(s.config.solver.feas_tol);
  h.add(s.config.solver.abs_tol);
  h.add(s.config.solver.rel_tol);
  return h.value();
}

Scenario scale_tariff(const Scenario& s, double multiplier) {
  if (!(multiplier > 0) || !std::isfinite(multiplier)) {
    throw Error(ErrorCode::kInvalidValue, "price multiplier must be > 0");
  }
  Scenario out = s;
  for (auto* v : {&out.tariff.pi_buy, &out.tariff.pi_sell, &out.tariff.pi_m_up,
                  &out.tariff.pi_m_dw}) {
    for (double& x : *v) x *= multiplier;
  }
  return out;
}

}  // namespace coopgrid
