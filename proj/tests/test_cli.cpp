#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include "mdslab/cli.hpp"
#include "mdslab/error.hpp"
#include "mdslab/table.hpp"

using namespace mdslab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mdslab_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("config round trip") {
  const std::string text = R"({"command":"stability converge","space":"circle","sizes":[16,32],"m":2,
    "p":4.5,"tol":1e-10,"seed":7,"out":"t.csv","options":{"jobs":2}})";
  const auto c = parse_config(text);
  CHECK(c.command == "stability converge");
  CHECK(c.sizes == std::vector<std::size_t>{16, 32});
  CHECK(*c.tol == 1e-10);
  CHECK(parse_config(format_config(c)) == c);
  const auto args = config_to_args(c);
  CHECK(args[0] == "stability");
  CHECK(args[1] == "converge");
  CHECK(std::find(args.begin(), args.end(), "--jobs") != args.end());
  CHECK(std::find(args.begin(), args.end(), "16,32") != args.end());

  for (const char* bad : {R"({"command":"x","colour":1})", R"({"space":"circle"})", R"({"command":"x","m":-1})",
                          R"([1,2])", "{not json"}) {
    try {
      parse_config(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
    }
  }
}

TEST_CASE("hash and registry") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  std::set<std::string_view> claimed;
  for (const auto& c : claim_registry()) {
    CHECK(!c.claim.empty());
    claimed.insert(c.command);
  }
  for (auto cmd : subcommands()) CHECK(claimed.count(cmd) == 1);
  CHECK(claimed.size() == subcommands().size());
}

TEST_CASE("exit codes") {
  CHECK(call({"nope"}).code == 2);
  CHECK(call({}).code == 2);
  const auto unknown = call({"mds", "shuffle"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("usage") != std::string::npos);
  CHECK(call({"sphere", "eigen", "--dim", "1", "--degree", "1", "--colour", "red"}).code == 2);
  CHECK(call({"sphere", "eigen", "--dim", "1", "--degree", "1", "--method", "guess"}).code == 2);

  const auto asym = scratch("asym.csv");
  write_text_file(asym, "n,2\n0,1\n2,0\n0.5,0.5\n");
  const auto bad = call({"mds", "embed", "--input", asym.string(), "--out", scratch("x.csv").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("AsymmetricMatrix") != std::string::npos);

  // Numerical failure: the series cannot settle at this tolerance.
  CHECK(call({"sphere", "eigen", "--dim", "1", "--degree", "1", "--method", "series", "--tol", "1e-18"}).code == 3);
}

TEST_CASE("sphere eigen prints the value") {
  const auto r = call({"sphere", "eigen", "--dim", "1", "--degree", "1", "--method", "quadrature"});
  CHECK(r.code == 0);
  CHECK(r.out == "1.0\n");
}

TEST_CASE("mds embed on the triangle") {
  const auto in = scratch("tri.csv"), out = scratch("emb.csv");
  write_text_file(in, "n,3\n0,1,1\n1,0,1\n1,1,0\n0.33333333333333331,0.33333333333333331,0.33333333333333337\n");
  REQUIRE(call({"mds", "embed", "--input", in.string(), "--m", "2", "--out", out.string()}).code == 0);
  const auto t = parse_table(read_text_file(out));
  REQUIRE(t.rows.size() == 3);
  REQUIRE(t.header.size() == 2);
  for (int i = 0; i < 3; ++i)
    for (int k = i + 1; k < 3; ++k)
      CHECK(std::hypot(t.rows[i][0] - t.rows[k][0], t.rows[i][1] - t.rows[k][1]) == doctest::Approx(1.0));
  CHECK(fs::exists(out.string() + ".run.json"));
}

TEST_CASE("seed falls back to the environment") {
  const auto a = scratch("s1.csv"), b = scratch("s2.csv"), c = scratch("s3.csv");
  ::setenv("MDSLAB_SEED", "99", 1);
  REQUIRE(call({"space", "gen", "--space", "sphere(2)", "--n", "5", "--mode", "random", "--out", a.string()}).code == 0);
  ::unsetenv("MDSLAB_SEED");
  REQUIRE(call({"space", "gen", "--space", "sphere(2)", "--n", "5", "--mode", "random", "--seed", "99", "--out", b.string()}).code == 0);
  REQUIRE(call({"space", "gen", "--space", "sphere(2)", "--n", "5", "--mode", "random", "--out", c.string()}).code == 0);
  CHECK(read_text_file(a) == read_text_file(b));
  CHECK(read_text_file(a) != read_text_file(c));
}

TEST_CASE("run --config") {
  const auto cfg = scratch("cfg.json"), out = scratch("conv.csv");
  write_text_file(cfg, R"({"command":"stability converge","space":"circle","sizes":[16,32],"m":2,"out":")" +
                           out.string() + R"(","options":{"jobs":2}})");
  REQUIRE(call({"run", "--config", cfg.string()}).code == 0);
  CHECK(parse_table(read_text_file(out)).rows.size() == 2);
  write_text_file(cfg, R"({"command":"stability converge","extra":1})");
  CHECK(call({"run", "--config", cfg.string()}).code == 2);
  CHECK(call({"run", "--config", scratch("missing.json").string()}).code == 2);
}
