#include "coopgrid/conic/text_format.h"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "coopgrid/error.h"

namespace coopgrid::conic {
namespace {

constexpr const char* kMagic = "coopgrid-program";
constexpr int kVersion = 1;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  std::ostringstream os;
  os << std::quoted(s);
  return os.str();
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void expect(const std::string& word) {
    const std::string got = token();
    if (got != word) fail("expected '" + word + "', got '" + got + "'");
  }

  std::string token() {
    std::string t;
    if (!(in_ >> t)) fail("unexpected end of input");
    return t;
  }

  double real() {
    const std::string t = token();
    if (t == "inf") return kInf;
    if (t == "-inf") return -kInf;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0' || std::isnan(v)) {
      fail("bad number '" + t + "'");
    }
    return v;
  }

  long integer(long lo, long hi) {
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0' || v < lo || v > hi) {
      fail("bad integer '" + t + "'");
    }
    return v;
  }

  std::string text() {
    std::string s;
    if (!(in_ >> std::quoted(s))) fail("bad quoted string");
    return s;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw Error(ErrorCode::kParseError, "program text: " + what);
  }

 private:
  std::istream& in_;
};

}  // namespace

void dump_program(const ConicProgram& p, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "offset " << num(p.objective_offset) << '\n';
  out << "vars " << p.num_vars() << '\n';
  for (int j = 0; j < p.num_vars(); ++j) {
    out << "v " << num(p.lower[j]) << ' ' << num(p.upper[j]) << ' '
        << num(p.cost[j]) << ' ' << int(p.binary[j]) << ' ' << quote(p.names[j])
        << '\n';
  }
  out << "rows " << p.rows.size() << '\n';
  for (const LinearRow& r : p.rows) {
    out << "r " << num(r.lower) << ' ' << num(r.upper) << ' ' << r.terms.size();
    for (const Term& t : r.terms) out << ' ' << t.var << ' ' << num(t.coef);
    out << ' ' << quote(r.label) << '\n';
  }
  out << "cones " << p.cones.size() << '\n';
  for (const SecondOrderCone& k : p.cones) {
    out << "c " << k.head << ' ' << k.tail.size();
    for (int v : k.tail) out << ' ' << v;
    out << '\n';
  }
  out << "rcones " << p.rotated_cones.size() << '\n';
  for (const RotatedCone& k : p.rotated_cones) {
    out << "q " << k.first << ' ' << k.second << ' ' << k.tail.size();
    for (int v : k.tail) out << ' ' << v;
    out << '\n';
  }
  out << "end\n";
}

std::string dump_program(const ConicProgram& program) {
  std::ostringstream os;
  dump_program(program, os);
  return os.str();
}

ConicProgram load_program(std::istream& in) {
  Reader rd(in);
  constexpr long kMax = 1L << 30;
  ConicProgram p;
  rd.expect(kMagic);
  if (rd.integer(0, kMax) != kVersion) rd.fail("unsupported version");
  rd.expect("offset");
  p.objective_offset = rd.real();
  rd.expect("vars");
  const long n = rd.integer(0, kMax);
  for (long j = 0; j < n; ++j) {
    rd.expect("v");
    const double lo = rd.real();
    const double up = rd.real();
    const double c = rd.real();
    const long bin = rd.integer(0, 1);
    const int v = p.add_variable(lo, up, c, rd.text());
    p.binary[v] = static_cast<std::uint8_t>(bin);
  }
  auto index = [&] { return static_cast<int>(rd.integer(0, n - 1)); };
  rd.expect("rows");
  const long m = rd.integer(0, kMax);
  for (long i = 0; i < m; ++i) {
    rd.expect("r");
    LinearRow r;
    r.lower = rd.real();
    r.upper = rd.real();
    const long k = rd.integer(0, kMax);
    for (long t = 0; t < k; ++t) {
      const int var = index();
      r.terms.push_back({var, rd.real()});
    }
    r.label = rd.text();
    p.rows.push_back(std::move(r));
  }
  rd.expect("cones");
  const long nc = rd.integer(0, kMax);
  for (long i = 0; i < nc; ++i) {
    rd.expect("c");
    SecondOrderCone k;
    k.head = index();
    const long len = rd.integer(0, kMax);
    for (long t = 0; t < len; ++t) k.tail.push_back(index());
    p.cones.push_back(std::move(k));
  }
  rd.expect("rcones");
  const long nr = rd.integer(0, kMax);
  for (long i = 0; i < nr; ++i) {
    rd.expect("q");
    RotatedCone k;
    k.first = index();
    k.second = index();
    const long len = rd.integer(0, kMax);
    for (long t = 0; t < len; ++t) k.tail.push_back(index());
    p.rotated_cones.push_back(std::move(k));
  }
  rd.expect("end");
  try {
    p.check();
  } catch (const Error& e) {
    rd.fail(e.what());
  }
  return p;
}

ConicProgram load_program(const std::string& text) {
  std::istringstream is(text);
  return load_program(is);
}

}  // namespace coopgrid::conic
