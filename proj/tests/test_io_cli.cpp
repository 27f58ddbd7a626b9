#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "soplab/cli.hpp"
#include "soplab/errors.hpp"
#include "soplab/io.hpp"

using namespace soplab;
namespace fs = std::filesystem;

namespace {

const std::string kData = SOPLAB_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> model_flags() {
  return {"--params", kData + "/params.txt", "--ocv", kData + "/ocv_linear.csv", "--soa",
          kData + "/soa.txt"};
}

std::vector<std::string> cmd(std::string name, std::vector<std::string> extra) {
  std::vector<std::string> a{std::move(name)};
  for (auto& f : model_flags()) a.push_back(f);
  for (auto& e : extra) a.push_back(std::move(e));
  return a;
}

io::Report parse(const std::string& text) {
  std::istringstream in(text);
  return io::parse_report(in);
}

fs::path scratch(const std::string& name, const std::string& body) {
  const auto dir = fs::temp_directory_path() / "soplab_tests";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("number parsing is strict") {
  CHECK(io::parse_number("1.5", "x") == 1.5);
  CHECK(io::parse_number(" -2e-3 ", "x") == -0.002);
  CHECK(io::parse_number("+4", "x") == 4.0);
  CHECK(io::parse_number(".5", "x") == 0.5);
  for (const char* bad : {"", "1,5", "abc", "nan", "inf", "0x10", "1e", "1.2.3", "1e999", "--1"})
    CHECK_THROWS_AS(io::parse_number(bad, "x"), InputError);
}

TEST_CASE("number rendering keeps 12 significant digits") {
  CHECK(io::format_number(28.936971656821) == "28.9369716568");
  CHECK(io::format_number(-0.0) == "0");
  CHECK(io::format_number(1e-20) == "1e-20");
  CHECK(io::format_number(10.0) == "10");
}

TEST_CASE("params and SOA files") {
  std::istringstream p("# cell\nr0_ohm=0.05\n r1_ohm = 0.03\ntau_s=10\ncapacity_ah=2\ncoulombic_eff=1\n");
  const auto bp = io::parse_params(p, "p");
  CHECK(bp.r0 == 0.05);
  CHECK(bp.r1 == 0.03);
  CHECK(bp.tau == 10.0);

  std::istringstream missing("r0_ohm=0.05\n");
  CHECK_THROWS_AS(io::parse_params(missing, "p"), InputError);
  std::istringstream unknown("r0_ohm=0.05\nr1_ohm=0.03\ntau_s=10\ncapacity_ah=2\ncoulombic_eff=1\nfoo=1\n");
  CHECK_THROWS_AS(io::parse_params(unknown, "p"), InputError);
  std::istringstream dup("r0_ohm=0.05\nr0_ohm=0.05\n");
  CHECK_THROWS_AS(io::parse_params(dup, "p"), InputError);
  std::istringstream invalid("r0_ohm=0\nr1_ohm=0.03\ntau_s=10\ncapacity_ah=2\ncoulombic_eff=1\n");
  CHECK_THROWS_AS(io::parse_params(invalid, "p"), InputError);

  const auto soa = io::read_soa(kData + "/soa.txt");
  CHECK(soa.i_max_chg == -4.0);
  std::istringstream bad_sign("vt_min=2.8\nvt_max=4.3\ni_max_dis=10\ni_max_chg=4\nsoc_min=0.1\nsoc_max=0.9\n");
  CHECK_THROWS_AS(io::parse_soa(bad_sign, "s"), InputError);
}

TEST_CASE("OCV and profile CSVs") {
  const auto c = io::read_ocv(kData + "/ocv_knee.csv");
  CHECK(c.points().size() == 5);
  CHECK(c(0.25) == 3.6);

  std::istringstream no_header("0,3.0\n1,4.2\n");
  CHECK_THROWS_AS(io::parse_ocv(no_header, "o"), InputError);
  std::istringstream unsorted("soc,ocv_volts\n0.5,3.5\n0.2,3.2\n");
  CHECK_THROWS_AS(io::parse_ocv(unsorted, "o"), InputError);
  std::istringstream three("soc,ocv_volts\n0,3,1\n");
  CHECK_THROWS_AS(io::parse_ocv(three, "o"), InputError);

  const auto prof = io::read_profile(kData + "/profile_cc.csv");
  CHECK(prof.size() == 31);
  CHECK(prof[1].current == 5.0);
  std::istringstream bad_row("t_s,current_a\n0,0\n1,x\n");
  CHECK_THROWS_AS(io::parse_profile(bad_row, "pr"), InputError);
  std::istringstream back("t_s,current_a\n0,0\n0,1\n");
  CHECK_THROWS_AS(io::parse_profile(back, "pr"), InputError);
  std::istringstream empty("t_s,current_a\n");
  CHECK_THROWS_AS(io::parse_profile(empty, "pr"), InputError);
  CHECK_THROWS_AS(io::read_profile("/nonexistent/profile.csv"), InputError);
}

TEST_CASE("report round trip") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  io::Report r;
  auto& s = r.add("summary");
  s.add_field("mode", "cc");
  s.add_field("value", 1.0 / 3.0);
  auto& t = r.add("trace", {"a", "b", "c"});
  for (int i = 0; i < 50; ++i) t.add_row(std::vector<double>{u(rng), u(rng) * 1e-9, u(rng) * 1e9});

  std::ostringstream first;
  io::write_report(first, r);
  const auto back = parse(first.str());
  std::ostringstream second;
  io::write_report(second, back);
  CHECK(first.str() == second.str());

  CHECK(back.section("summary").field("mode") == "cc");
  CHECK(back.section("summary").number("value") == io::parse_number(io::format_number(1.0 / 3.0), "v"));
  const auto& bt = back.section("trace");
  CHECK(bt.columns == t.columns);
  REQUIRE(bt.rows.size() == 50);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double v = io::parse_number(bt.rows[i][j], "v");
      CHECK(io::format_number(v) == t.rows[i][j]);
    }
  CHECK_THROWS_AS(back.section("nope"), InputError);
  CHECK_THROWS_AS(back.section("summary").field("nope"), InputError);
}

}

TEST_SUITE("cli") {

TEST_CASE("grid specs") {
  const auto g = cli::parse_grid("0.1:0.9:0.1");
  REQUIRE(g.size() == 9);
  CHECK(g[2] == 0.3);
  CHECK(g[8] == 0.9);
  CHECK(cli::parse_grid("-0.2:0.2:0.1").size() == 5);
  CHECK(cli::parse_grid("1,2,5") == std::vector<double>{1, 2, 5});
  CHECK(cli::parse_grid("").empty());
  CHECK(cli::parse_int_grid("1,10,30,60") == std::vector<int>{1, 10, 30, 60});
  CHECK_THROWS_AS(cli::parse_grid("0:1"), InputError);
  CHECK_THROWS_AS(cli::parse_grid("0:1:-0.1"), InputError);
  CHECK_THROWS_AS(cli::parse_int_grid("1.5"), InputError);
}

TEST_CASE("sop command") {
  const auto r = run(cmd("sop", {"--soc", "0.5", "-K", "10"}));
  REQUIRE(r.code == 0);
  const auto rep = parse(r.out);
  const auto& s = rep.section("summary");
  CHECK(s.number("sop_w") == doctest::Approx(28.937).epsilon(1e-4));
  CHECK(s.field("dominant") == "current");
  CHECK(s.field("feasible") == "1");
  CHECK(s.number("i_voltage_limit_a") == doctest::Approx(11.326).epsilon(1e-4));
  CHECK_FALSE(rep.has("trace"));

  for (const char* mode : {"cv", "cccv", "cp"}) {
    const auto m = run(cmd("sop", {"--soc", "0.3", "-K", "10", "--mode", mode}));
    CHECK(m.code == 0);
    const auto mr = parse(m.out);
    CHECK(mr.section("trace").rows.size() == 10);
    CHECK(mr.section("trace").columns.size() == 6);
  }
  CHECK(run(cmd("sop", {"--soc", "0.5", "--dir", "charge", "--eval", "min"})).code == 0);
}

TEST_CASE("sop at the SOC bound is infeasible") {
  const auto r = run(cmd("sop", {"--soc", "0.1"}));
  CHECK(r.code == 1);
  CHECK(parse(r.out).section("summary").field("status") == "infeasible");
}

TEST_CASE("input errors exit 2") {
  auto a = cmd("sop", {"--soc", "0.5"});
  a[4] = kData + "/missing.csv";
  const auto r = run(a);
  CHECK(r.code == 2);
  CHECK(r.err.find("missing.csv") != std::string::npos);
  CHECK(run({"sop"}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run(cmd("sop", {"--soc", "0.5", "--mode", "xx"})).code == 2);
  CHECK(run(cmd("sop", {"--soc", "1.5"})).code == 2);
  CHECK(run(cmd("sop", {"--soc", "0.5", "-K", "0"})).code == 2);
  CHECK(run(cmd("sop", {"--soc", "abc"})).code == 2);
  const auto bad = scratch("bad_params.txt", "r0_ohm=oops\n");
  auto b = cmd("sop", {"--soc", "0.5"});
  b[2] = bad.string();
  CHECK(run(b).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("--out writes the report to a file") {
  const auto path = fs::temp_directory_path() / "soplab_tests" / "out.csv";
  fs::create_directories(path.parent_path());
  const auto r = run(cmd("sop", {"--soc", "0.5", "--out", path.string()}));
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  const auto rep = io::parse_report(in);
  CHECK(rep.section("summary").field("mode") == "cc");
}

TEST_CASE("sweep-error command") {
  const auto zero = run(cmd("sweep-error", {"--soc", "0.5", "--source", "soc", "--constraint", "soc", "--grid", "0"}));
  REQUIRE(zero.code == 0);
  const auto zr = parse(zero.out);
  REQUIRE(zr.section("sweep").rows.size() == 1);
  const auto& row = zr.section("sweep").rows[0];
  for (std::size_t j = 2; j < row.size(); ++j) CHECK(io::parse_number(row[j], "v") == 0.0);

  const auto fit = run(cmd("sweep-error", {"--soc", "0.5", "--source", "soc", "--constraint", "soc",
                                           "--grid", "-0.1:0.1:0.01"}));
  REQUIRE(fit.code == 0);
  const auto fr = parse(fit.out);
  const auto& fs_ = fr.section("summary");
  CHECK(std::abs(fs_.number("fit_a") - fs_.number("parabola_a")) <= 1e-6 * std::abs(fs_.number("parabola_a")));
  CHECK(std::abs(fs_.number("fit_b") - fs_.number("parabola_b")) <= 1e-6 * std::abs(fs_.number("parabola_b")));

  const auto dom = run(cmd("sweep-error", {"--soc", "0.5", "--source", "r_sum", "--constraint",
                                           "voltage", "--grid", "0,0.01,1"}));
  REQUIRE(dom.code == 0);
  const auto dr = parse(dom.out);
  CHECK(dr.section("summary").number("out_of_domain") == 1.0);
  CHECK(dr.section("sweep").rows[2][1] == "0");

  CHECK(run(cmd("sweep-error", {"--soc", "0.5", "--source", "temp", "--constraint", "soc", "--grid", "0"})).code == 2);
  CHECK(run(cmd("sweep-error", {"--soc", "0.5", "--source", "soc", "--constraint", "soc", "--grid", ""})).code == 2);
}

TEST_CASE("validate command") {
  const auto ok = run(cmd("validate", {}));
  CHECK(ok.code == 0);
  const auto okr = parse(ok.out);
  const auto& s = okr.section("summary");
  CHECK(s.number("points") == 72.0);
  CHECK(s.number("passed") == 72.0);

  CHECK(run(cmd("validate", {"--fault-r1", "0.2"})).code == 1);
  CHECK(run(cmd("validate", {"--soc-grid", ""})).code == 2);
  CHECK(run(cmd("validate", {"--dirs", "sideways"})).code == 2);
}

TEST_CASE("simulate command") {
  const auto zero = scratch("zero.csv", "t_s,current_a\n0,0\n1,0\n2,0\n5,0\n");
  auto a = cmd("simulate", {"--soc", "0.5", "--profile", zero.string()});
  const auto z = run(a);
  REQUIRE(z.code == 0);
  const auto zr = parse(z.out);
  const auto& zt = zr.section("trace");
  REQUIRE(zt.rows.size() == 4);
  for (const auto& r : zt.rows) CHECK(r[zt.column("soc")] == "0.5");

  const auto cc = run(cmd("simulate", {"--soc", "0.5", "--profile", kData + "/profile_cc.csv"}));
  REQUIRE(cc.code == 0);
  const auto cr = parse(cc.out);
  const auto& ct = cr.section("trace");
  // 30 s at 5 A from 0.5 on the linear fixture, by hand.
  const double soc = 0.5 - 5.0 * 30.0 / 7200.0;
  const double vp = 5.0 * 0.03 * (1.0 - std::exp(-3.0));
  const double vt = 3.0 + 1.2 * soc - vp - 5.0 * 0.05;
  CHECK(io::parse_number(ct.rows.back()[ct.column("vt_v")], "v") == doctest::Approx(vt).epsilon(1e-11));
  CHECK(io::parse_number(ct.rows.back()[ct.column("soc")], "v") == doctest::Approx(soc).epsilon(1e-11));
  CHECK(ct.rows.back()[ct.column("violations")] == "none");

  const auto hot = scratch("hot.csv", "t_s,current_a\n0,0\n1,12\n");
  const auto h = run(cmd("simulate", {"--soc", "0.5", "--profile", hot.string()}));
  REQUIRE(h.code == 0);
  CHECK(parse(h.out).section("trace").rows[1].back() == "current_high_dis");

  const auto bad = scratch("bad.csv", "t_s,current_a\n0,0\n1\n");
  CHECK(run(cmd("simulate", {"--soc", "0.5", "--profile", bad.string()})).code == 2);
}

}
