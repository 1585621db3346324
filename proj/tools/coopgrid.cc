// Command-line front end: data goes to stdout (or --out), diagnostics to stderr.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "coopgrid/conic/text_format.h"
#include "coopgrid/dispatch/characteristic.h"
#include "coopgrid/dispatch/robust.h"
#include "coopgrid/report/report.h"
#include "coopgrid/report/scenario_io.h"

using namespace coopgrid;

namespace {

struct Common {
  std::string scenario;
  std::string out;
  int workers = 1;
  bool timing = false;
};

Scenario load(const Common& c) {
  Scenario s = report::load_scenario(c.scenario);
  if (const char* env = std::getenv("COOPGRID_TIME_LIMIT")) {
    char* end = nullptr;
    const double limit = std::strtod(env, &end);
    if (end == env || !(limit > 0)) {
      throw Error(ErrorCode::kInvalidValue, "COOPGRID_TIME_LIMIT must be a positive number");
    }
    s.config.solver.time_limit = limit;
  }
  s.config.solver.workers = c.workers;
  return s;
}

// Writes to --out when given so a failed run leaves no partial file.
void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidValue, "cannot write " + c.out);
  f << text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidValue, "cannot write " + path);
  f << text;
}

Coalition parse_coalition(const std::string& text, int n) {
  std::uint64_t mask = 0;
  try {
    std::size_t used = 0;
    mask = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidValue, "coalition must be a bitmask, got '" + text + "'");
  }
  const Coalition c(mask);
  if (c.empty()) throw Error(ErrorCode::kEmptyCoalition, "coalition bitmask is 0");
  if (!c.subset_of(Coalition::grand(n))) {
    throw Error(ErrorCode::kInvalidValue,
                "coalition " + text + " names players beyond " + std::to_string(n));
  }
  return c;
}

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("scenario", c.scenario, "scenario JSON file")->required();
  if (with_out) cmd->add_option("-o,--out", c.out, "write data here instead of stdout");
  cmd->add_option("-j,--workers", c.workers, "parallel coalition solves")
      ->check(CLI::Range(1, 256));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative electricity and data market clearing"};
  app.require_subcommand(1);
  Common c;
  std::string mode_text = "joint";
  std::string coalition_text;
  std::string method_text;
  std::string search = "membership";
  std::string benders_log;
  std::string excess_out;
  std::string prosumer_out;
  std::vector<double> multipliers;
  bool et = false;
  int samples = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto* validate = app.add_subcommand("validate", "check a scenario file");
  add_common(validate, c, false);

  auto* solve = app.add_subcommand("solve", "grand-coalition dispatch schedule");
  add_common(solve, c);
  solve->add_option("-m,--mode", mode_text, "isolated, electricity or joint");

  auto* value = app.add_subcommand("value", "characteristic value of one coalition");
  add_common(value, c);
  value->add_option("-c,--coalition", coalition_text, "member bitmask, e.g. 5 or 0b101")
      ->required();
  value->add_option("-m,--mode", mode_text, "isolated, electricity or joint");

  auto* cases = app.add_subcommand("cases", "compare isolated, electricity-only and joint");
  add_common(cases, c);
  cases->add_option("--prosumers", prosumer_out, "per-prosumer payoff table");
  cases->add_flag("--timing", c.timing, "add wall-clock columns");

  auto* impute = app.add_subcommand("impute", "allocate the grand-coalition payoff");
  add_common(impute, c);
  impute->add_option("--method", method_text, "shapley, nucleolus or leastcore")->required();
  impute->add_option("-m,--mode", mode_text, "electricity or joint");
  impute->add_option("--search", search,
                     "least-core coalition search: membership, enumeration, misocp, "
                     "misocp-conservative");
  impute->add_flag("--electricity-only-attribution", et,
                   "value proper coalitions without shared data");
  impute->add_option("--benders-log", benders_log, "least-core iteration log CSV");
  impute->add_option("--excess-out", excess_out, "violated coalitions CSV");
  impute->add_flag("--timing", c.timing, "add wall-clock columns to the log");

  auto* sweep = app.add_subcommand("sweep", "data value across tariff multipliers");
  add_common(sweep, c);
  sweep->add_option("--multipliers", multipliers, "tariff multipliers")->delimiter(',');

  auto* verify = app.add_subcommand("verify", "sample the uncertainty set against a schedule");
  add_common(verify, c);
  verify->add_option("-c,--coalition", coalition_text, "member bitmask (default: grand)");
  verify->add_option("-m,--mode", mode_text, "isolated, electricity or joint");
  verify->add_option("-n,--samples", samples, "number of samples (default from scenario)");
  verify->add_option("--seed", seed, "sampling seed (default from scenario)")
      ->each([&](const std::string&) { seed_given = true; });

  auto* dump = app.add_subcommand("dump-program", "print the conic program of a coalition");
  add_common(dump, c);
  dump->add_option("-c,--coalition", coalition_text, "member bitmask (default: grand)");
  dump->add_option("-m,--mode", mode_text, "isolated, electricity or joint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const Scenario s = load(c);
    const int n = s.num_players();
    const auto mode = dispatch::parse_mode(mode_text);
    const Coalition grand = Coalition::grand(n);
    std::ostringstream out;

    if (*validate) {
      const ValidationReport r = validate_scenario(s);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "ok: " << n << " prosumers, " << s.periods() << " periods, "
                << s.num_drgs() << " renewable units, "
                << (s.uncertainty.ellipsoid ? "ellipsoid" : "box") << " uncertainty\n";
      return 0;
    }
    if (*solve) {
      const Coalition target = mode == dispatch::DispatchMode::kIsolated ? Coalition() : grand;
      if (target.empty()) {
        for (int i = 0; i < n; ++i) {
          const auto v = dispatch::coalition_value(s, Coalition::singleton(i), mode);
          report::write_schedule_csv(out, s, v->schedule);
        }
      } else {
        const auto v = dispatch::coalition_value(s, grand, mode);
        report::write_schedule_csv(out, s, v->schedule);
        std::cerr << "payoff " << v->value << " (" << v->iterations << " iterations)\n";
      }
    } else if (*value) {
      const Coalition coal = parse_coalition(coalition_text, n);
      const auto v = dispatch::coalition_value(s, coal, mode);
      report::write_value_csv(out, *v, mode);
    } else if (*cases) {
      const report::CaseReport r = report::run_cases(s, c.workers);
      r.write_csv(out, c.timing);
      if (!prosumer_out.empty()) {
        std::ostringstream p;
        r.write_prosumer_csv(p);
        write_file(prosumer_out, p.str());
      }
      int failed = 0;
      for (const auto& row : r.cases) {
        if (!row.ok) {
          std::cerr << "case " << row.name << " failed: " << row.error << '\n';
          ++failed;
        }
      }
      emit(c, out.str());
      return failed ? 3 : 0;
    } else if (*impute) {
      report::ImputationOptions options;
      options.mode = mode;
      options.electricity_only_attribution = et;
      options.workers = c.workers;
      options.search = search;
      const auto r = report::run_imputation(s, report::parse_method(method_text), options);
      r.write_csv(out);
      if (r.log && !benders_log.empty()) {
        std::ostringstream log;
        r.log->write_csv(log, c.timing);
        write_file(benders_log, log.str());
      }
      if (!excess_out.empty()) {
        std::ostringstream ex;
        r.write_violations_csv(ex);
        write_file(excess_out, ex.str());
      }
      if (r.mu) {
        std::cerr << "least-core mu " << *r.mu << " after " << r.log->iterations.size()
                  << " iterations\n";
      }
      if (r.core_checked) {
        if (r.violations.empty()) {
          std::cerr << "allocation is in the core\n";
        }
        for (const auto& v : r.violations) {
          std::cerr << "coalition " << v.coalition.to_string() << " has positive excess "
                    << v.excess << '\n';
        }
      }
    } else if (*sweep) {
      const auto& m = multipliers.empty() ? s.config.sweep_multipliers : multipliers;
      report::write_sweep_csv(out, report::run_sweep(s, m));
    } else if (*verify) {
      const Coalition coal = coalition_text.empty() ? grand : parse_coalition(coalition_text, n);
      const int k = samples > 0 ? samples : s.config.verify_samples;
      const auto r = report::run_verify(s, coal, mode, k, seed_given ? seed : s.config.seed);
      report::write_verify_csv(out, r);
      emit(c, out.str());
      return r.report.violations == 0 ? 0 : 3;
    } else if (*dump) {
      const Coalition coal = coalition_text.empty() ? grand : parse_coalition(coalition_text, n);
      conic::dump_program(dispatch::build_counterpart(s, coal, mode).program, out);
    }
    emit(c, out.str());
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return report::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
