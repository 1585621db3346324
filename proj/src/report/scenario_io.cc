#include "coopgrid/report/scenario_io.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace coopgrid::report {
namespace {

using nlohmann::json;

// Cursor into the document that remembers its field path for messages.
class Node {
 public:
  Node(const json& j, std::string path, std::string_view source)
      : j_(j), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParseError,
                std::string(source_) + ": " + (path_.empty() ? "document" : path_) +
                    ": " + what);
  }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  void allow(std::initializer_list<std::string_view> keys) const {
    if (!j_.is_object()) fail("expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool known = false;
      for (std::string_view k : keys) known = known || it.key() == k;
      if (!known) fail("unknown key '" + it.key() + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.contains(key)) fail(std::string("missing key '") + key + "'");
    return Node(j_.at(key), child_path(key), source_);
  }

  Node at(std::size_t i) const {
    return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]", source_);
  }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (j_.is_string()) {
      const auto& s = j_.get_ref<const std::string&>();
      if (s == "inf") return conic::kInf;
      if (s == "-inf") return -conic::kInf;
    }
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }

  long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  std::string text() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
    return out;
  }

  std::vector<double> series(int periods) const {
    if (j_.is_number()) return std::vector<double>(periods, number());
    auto v = numbers();
    if (static_cast<int>(v.size()) != periods) {
      fail("expected " + std::to_string(periods) + " entries, got " +
           std::to_string(v.size()));
    }
    return v;
  }

  Eigen::VectorXd vector(int dim) const {
    const auto v = numbers();
    if (static_cast<int>(v.size()) != dim) {
      fail("expected " + std::to_string(dim) + " entries, got " + std::to_string(v.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
  }

  Eigen::MatrixXd square(int dim) const {
    const std::size_t rows = size();
    if (static_cast<int>(rows) != dim) {
      fail("shape must be " + std::to_string(dim) + "x" + std::to_string(dim) + ", got " +
           std::to_string(rows) + " rows");
    }
    Eigen::MatrixXd m(dim, dim);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = at(r).numbers();
      if (row.size() != rows) {
        at(r).fail("shape is not square: " + std::to_string(rows) + " rows but " +
                   std::to_string(row.size()) + " columns");
      }
      for (int c = 0; c < dim; ++c) m(r, c) = row[c];
    }
    return m;
  }

 private:
  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::string_view source_;
};

MachineSpec read_machine(const Node& n, int T) {
  n.allow({"pg_max", "a", "b", "c", "pi_g_up", "pi_g_dw"});
  MachineSpec m;
  m.pg_max = n.at("pg_max").number();
  m.a = n.at("a").number();
  m.b = n.at("b").number();
  m.c = n.has("c") ? n.at("c").number() : 0.0;
  m.pi_g_up = n.at("pi_g_up").series(T);
  m.pi_g_dw = n.at("pi_g_dw").series(T);
  return m;
}

ProsumerSpec read_prosumer(const Node& n, int T, int index) {
  n.allow({"id", "pd_min", "pd_max", "lambda", "beta", "pi_d_up", "pi_d_dw", "machines",
           "drgs", "exchange_cap"});
  ProsumerSpec p;
  p.id = n.has("id") ? n.at("id").text() : "p" + std::to_string(index);
  p.pd_min = n.at("pd_min").series(T);
  p.pd_max = n.at("pd_max").series(T);
  p.lambda = n.at("lambda").series(T);
  p.beta = n.at("beta").series(T);
  p.pi_d_up = n.at("pi_d_up").series(T);
  p.pi_d_dw = n.at("pi_d_dw").series(T);
  if (n.has("exchange_cap")) p.exchange_cap = n.at("exchange_cap").number();
  if (n.has("machines")) {
    const Node ms = n.at("machines");
    for (std::size_t g = 0; g < ms.size(); ++g) p.machines.push_back(read_machine(ms.at(g), T));
  }
  if (n.has("drgs")) {
    const Node ws = n.at("drgs");
    for (std::size_t w = 0; w < ws.size(); ++w) {
      const Node u = ws.at(w);
      u.allow({"pw0", "dpw_max"});
      p.drgs.push_back({u.at("pw0").series(T), u.at("dpw_max").series(T)});
    }
  }
  return p;
}

void read_uncertainty(const Node& n, Scenario& s) {
  if (n.raw().is_string()) {
    if (n.text() != "box") n.fail("expected \"box\" or an ellipsoid object");
    return;
  }
  n.allow({"kind", "scope", "centers", "shapes"});
  if (n.at("kind").text() != "ellipsoid") n.at("kind").fail("expected \"ellipsoid\"");
  const std::string scope = n.has("scope") ? n.at("scope").text() : "per-period";
  const int D = s.num_drgs();
  const int T = s.periods();
  int blocks = T, dim = D;
  if (scope == "horizon") {
    s.uncertainty.scope = BudgetScope::kHorizon;
    blocks = 1;
    dim = D * T;
  } else if (scope != "per-period") {
    n.at("scope").fail("expected \"per-period\" or \"horizon\"");
  }
  s.uncertainty.ellipsoid = true;
  const Node shapes = n.at("shapes");
  if (static_cast<int>(shapes.size()) != blocks) {
    shapes.fail("expected " + std::to_string(blocks) + " shape matrices");
  }
  for (int b = 0; b < blocks; ++b) s.uncertainty.shapes.push_back(shapes.at(b).square(dim));
  if (n.has("centers")) {
    const Node centers = n.at("centers");
    if (static_cast<int>(centers.size()) != blocks) {
      centers.fail("expected " + std::to_string(blocks) + " centers");
    }
    for (int b = 0; b < blocks; ++b) s.uncertainty.centers.push_back(centers.at(b).vector(dim));
  } else {
    s.uncertainty.centers.assign(blocks, Eigen::VectorXd::Zero(dim));
  }
}

void read_solver(const Node& n, conic::SolverConfig& c) {
  n.allow({"feas_tol", "abs_tol", "rel_tol", "max_iterations", "rel_gap", "integrality_tol",
           "epsilon", "mu_min", "big_m", "big_m_safety", "node_limit", "time_limit", "seed",
           "workers", "benders_max_iterations"});
  auto num = [&](const char* k, double& out) {
    if (n.has(k)) out = n.at(k).number();
  };
  auto integer = [&](const char* k, auto& out) {
    if (n.has(k)) out = static_cast<std::decay_t<decltype(out)>>(n.at(k).integer());
  };
  num("feas_tol", c.feas_tol);
  num("abs_tol", c.abs_tol);
  num("rel_tol", c.rel_tol);
  integer("max_iterations", c.max_iterations);
  num("rel_gap", c.rel_gap);
  num("integrality_tol", c.integrality_tol);
  num("epsilon", c.epsilon);
  num("mu_min", c.mu_min);
  num("big_m", c.big_m);
  num("big_m_safety", c.big_m_safety);
  integer("node_limit", c.node_limit);
  num("time_limit", c.time_limit);
  integer("seed", c.seed);
  integer("workers", c.workers);
  integer("benders_max_iterations", c.benders_max_iterations);
  try {
    c.check();
  } catch (const Error& e) {
    n.fail(e.what());
  }
}

void read_config(const Node& n, Scenario& s) {
  n.allow({"electricity_only_set", "per_period_shares", "solver", "sweep_multipliers",
           "verify_samples"});
  if (n.has("electricity_only_set")) {
    const std::string v = n.at("electricity_only_set").text();
    if (v == "box") {
      s.config.electricity_only_set = ElectricityOnlySet::kBox;
    } else if (v == "historical") {
      s.config.electricity_only_set = ElectricityOnlySet::kHistorical;
    } else {
      n.at("electricity_only_set").fail("expected \"box\" or \"historical\"");
    }
  }
  if (n.has("per_period_shares")) s.config.per_period_shares = n.at("per_period_shares").boolean();
  if (n.has("solver")) read_solver(n.at("solver"), s.config.solver);
  if (n.has("sweep_multipliers")) {
    s.config.sweep_multipliers = n.at("sweep_multipliers").numbers();
    for (double m : s.config.sweep_multipliers) {
      if (!(m > 0)) n.at("sweep_multipliers").fail("multipliers must be positive");
    }
  }
  if (n.has("verify_samples")) {
    s.config.verify_samples = static_cast<int>(n.at("verify_samples").integer());
  }
}

Scenario read_document(const Node& root) {
  root.allow({"format", "name", "seed", "time", "prosumers", "tariff", "uncertainty",
              "contributions", "config"});
  if (root.at("format").text() != kScenarioFormat) {
    root.at("format").fail("expected \"" + std::string(kScenarioFormat) + "\"");
  }
  Scenario s;
  s.config.name = root.has("name") ? root.at("name").text() : "";
  if (root.has("seed")) s.config.seed = static_cast<std::uint64_t>(root.at("seed").integer());
  const Node time = root.at("time");
  time.allow({"periods", "period_hours"});
  const long periods = time.at("periods").integer();
  if (periods < 1 || periods > 100000) time.at("periods").fail("must be in 1..100000");
  s.grid.periods = static_cast<int>(periods);
  if (time.has("period_hours")) s.grid.period_hours = time.at("period_hours").number();
  const int T = s.grid.periods;

  const Node ps = root.at("prosumers");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    s.prosumers.push_back(read_prosumer(ps.at(i), T, static_cast<int>(i)));
  }
  const Node tariff = root.at("tariff");
  tariff.allow({"pi_buy", "pi_sell", "pi_m_up", "pi_m_dw"});
  s.tariff.pi_buy = tariff.at("pi_buy").series(T);
  s.tariff.pi_sell = tariff.at("pi_sell").series(T);
  s.tariff.pi_m_up = tariff.at("pi_m_up").series(T);
  s.tariff.pi_m_dw = tariff.at("pi_m_dw").series(T);

  if (root.has("uncertainty")) read_uncertainty(root.at("uncertainty"), s);
  if (root.has("contributions")) {
    const Node c = root.at("contributions");
    c.allow({"k_h", "terms"});
    s.contributions.k_h = c.at("k_h").number();
    if (c.has("terms")) {
      const Node terms = c.at("terms");
      for (std::size_t k = 0; k < terms.size(); ++k) {
        const Node t = terms.at(k);
        t.allow({"members", "k"});
        std::vector<int> members;
        const Node m = t.at("members");
        for (std::size_t j = 0; j < m.size(); ++j) {
          const long i = m.at(j).integer();
          if (i < 0 || i >= static_cast<long>(s.prosumers.size())) {
            m.at(j).fail("no prosumer " + std::to_string(i));
          }
          members.push_back(static_cast<int>(i));
        }
        if (members.empty()) m.fail("a contribution needs at least one member");
        s.contributions.terms.push_back({Coalition::of(members), t.at("k").number()});
      }
    }
  }
  if (root.has("config")) read_config(root.at("config"), s);
  return s;
}

json number_json(double v) {
  if (v == conic::kInf) return "inf";
  if (v == -conic::kInf) return "-inf";
  return v;
}

json vec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

json vec(const Eigen::VectorXd& v) {
  return vec(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

Scenario parse_scenario(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
    throw Error(ErrorCode::kParseError,
                std::string(source) + ":" + std::to_string(line) + ": malformed JSON (" +
                    e.what() + ")");
  }
  Scenario s = read_document(Node(doc, "", source));
  const ValidationReport report = validate_scenario(s);
  if (!report.errors.empty()) {
    const ValidationIssue& first = report.errors.front();
    throw Error(ErrorCode::kValidationError,
                std::string(source) + ": " + std::string(error_code_name(first.code)) + ": " +
                    first.message);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string write_scenario(const Scenario& s) {
  json doc = json::object();
  doc["format"] = kScenarioFormat;
  doc["name"] = s.config.name;
  doc["seed"] = s.config.seed;
  doc["time"] = {{"periods", s.grid.periods}, {"period_hours", s.grid.period_hours}};
  json ps = json::array();
  for (const ProsumerSpec& p : s.prosumers) {
    json j = {{"id", p.id},           {"pd_min", vec(p.pd_min)},   {"pd_max", vec(p.pd_max)},
              {"lambda", vec(p.lambda)}, {"beta", vec(p.beta)},    {"pi_d_up", vec(p.pi_d_up)},
              {"pi_d_dw", vec(p.pi_d_dw)}};
    if (p.exchange_cap != conic::kInf) j["exchange_cap"] = number_json(p.exchange_cap);
    json ms = json::array();
    for (const MachineSpec& m : p.machines) {
      ms.push_back({{"pg_max", m.pg_max}, {"a", m.a}, {"b", m.b}, {"c", m.c},
                    {"pi_g_up", vec(m.pi_g_up)}, {"pi_g_dw", vec(m.pi_g_dw)}});
    }
    json ws = json::array();
    for (const DrgSpec& w : p.drgs) ws.push_back({{"pw0", vec(w.pw0)}, {"dpw_max", vec(w.dpw_max)}});
    j["machines"] = ms;
    j["drgs"] = ws;
    ps.push_back(j);
  }
  doc["prosumers"] = ps;
  doc["tariff"] = {{"pi_buy", vec(s.tariff.pi_buy)}, {"pi_sell", vec(s.tariff.pi_sell)},
                   {"pi_m_up", vec(s.tariff.pi_m_up)}, {"pi_m_dw", vec(s.tariff.pi_m_dw)}};
  if (s.uncertainty.ellipsoid) {
    json shapes = json::array(), centers = json::array();
    for (const auto& q : s.uncertainty.shapes) {
      json rows = json::array();
      for (int r = 0; r < q.rows(); ++r) rows.push_back(vec(Eigen::VectorXd(q.row(r).transpose())));
      shapes.push_back(rows);
    }
    for (const auto& c : s.uncertainty.centers) centers.push_back(vec(c));
    doc["uncertainty"] = {
        {"kind", "ellipsoid"},
        {"scope", s.uncertainty.scope == BudgetScope::kHorizon ? "horizon" : "per-period"},
        {"centers", centers},
        {"shapes", shapes}};
  } else {
    doc["uncertainty"] = "box";
  }
  json terms = json::array();
  for (const auto& t : s.contributions.terms) {
    terms.push_back({{"members", t.key.members()}, {"k", t.k}});
  }
  doc["contributions"] = {{"k_h", s.contributions.k_h}, {"terms", terms}};
  const conic::SolverConfig& c = s.config.solver;
  doc["config"] = {
      {"electricity_only_set",
       s.config.electricity_only_set == ElectricityOnlySet::kHistorical ? "historical" : "box"},
      {"per_period_shares", s.config.per_period_shares},
      {"sweep_multipliers", vec(s.config.sweep_multipliers)},
      {"verify_samples", s.config.verify_samples},
      {"solver",
       {{"feas_tol", c.feas_tol}, {"abs_tol", c.abs_tol}, {"rel_tol", c.rel_tol},
        {"max_iterations", c.max_iterations}, {"rel_gap", c.rel_gap},
        {"integrality_tol", c.integrality_tol}, {"epsilon", c.epsilon}, {"mu_min", c.mu_min},
        {"big_m", c.big_m}, {"big_m_safety", c.big_m_safety}, {"node_limit", c.node_limit},
        {"time_limit", number_json(c.time_limit)}, {"seed", c.seed}, {"workers", c.workers},
        {"benders_max_iterations", c.benders_max_iterations}}}};
  return doc.dump(2) + "\n";
}

}  // namespace coopgrid::report
