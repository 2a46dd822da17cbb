#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(STABHOM_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string src(const std::string& rel) { return std::string(STABHOM_SOURCE_DIR) + "/" + rel; }

// Validates a JSON document against one of the shipped schemas.
bool schema_valid(const std::string& schema, const std::string& doc) {
  const auto file = std::filesystem::temp_directory_path() / ("stabhom-cli-" + schema + ".json");
  std::ofstream(file) << doc;
  const std::string cmd = "python3 " + src("tools/validate_json.py") + " " + src("schemas/" + schema + ".schema.json") + " " +
                          file.string() + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  std::filesystem::remove(file);
  return WIFEXITED(st) && WEXITSTATUS(st) == 0;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("images") {
    Run r = run("images --ghz 2 --letter X");
    CHECK(r.status == 0);
    CHECK(r.out == "+X1X2\n-Y1Y2\n");
    r = run("images --ghz 3 --letter I");
    CHECK(r.out == "+I\n+Z1Z2\n+Z1Z3\n+Z2Z3\n");
    r = run("--json images --ghz 2 --letter Y");
    CHECK(r.status == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("members") == nlohmann::json::array({"+X1Y2", "+Y1X2"}));
    CHECK(schema_valid("images", r.out));
    CHECK(run("images --ghz 9 --letter X").status == 2);
  }

  TEST_CASE("usage errors") {
    CHECK(run("").status == 2);
    CHECK(run("bogus").status == 2);
    CHECK(run("bound " + src("inequalities/chsh.ineq") + " --kind nonsense").status == 2);
    CHECK(run("bound /nonexistent.ineq --kind lhv").status == 2);
  }

  TEST_CASE("parse") {
    Run r = run("parse --text \"A1*(A2+A2') + A1'*(A2-A2') <= 2\"");
    CHECK(r.status == 0);
    CHECK(r.out == "A1*A2 + A1*A2' + A1'*A2 - 1*A1'*A2' <= 2\n");
    r = run("--json parse " + src("inequalities/mermin3.ineq"));
    CHECK(schema_valid("parse", r.out));
    CHECK(run("parse --text \"A1 + <= 1\"").status == 2);
  }

  TEST_CASE("bounds") {
    CHECK(run("bound " + src("inequalities/chsh.ineq") + " --kind lhv").out == "2.00000000\n");
    CHECK(run("bound " + src("inequalities/nonlinear6.ineq") + " --kind nonlinear --sense two-sided").out == "24.0000000\n");
    CHECK(run("bound " + src("inequalities/werner-witness.ineq") + " --kind separable --parties \"1|2\"").out ==
          "1.00000000\n");
    const Run q = run("--json bound " + src("inequalities/nl1-3party.ineq") + " --kind lhv");
    CHECK(q.status == 0);
    CHECK(nlohmann::json::parse(q.out).at("value") == 4.0);
    CHECK(schema_valid("bound", q.out));
  }

  TEST_CASE("quantum value") {
    const Run r = run("qvalue " + src("inequalities/nl1-3party.ineq") + " --state \"pair:011,100,-\"");
    CHECK(r.status == 0);
    CHECK(r.out == "-6.00000000\n");
    CHECK(schema_valid("qvalue", run("--json qvalue " + src("inequalities/nl1-3party.ineq") +
                                     " --state \"pair:011,100,-\" --sense two-sided")
                                     .out));
  }

  TEST_CASE("descend") {
    const Run r = run("--json descend " + src("inequalities/chsh.ineq") + " --site 2 --ghz 2 --letters \"A2=X,A2'=Y\"");
    CHECK(r.status == 0);
    CHECK(schema_valid("descend", r.out));
    CHECK(run("descend " + src("inequalities/chsh.ineq") + " --site 2 --ghz 8").status == 2);
  }

  TEST_CASE("audit exit codes and JSON") {
    Run r = run("audit " + src("fixtures"));
    CHECK(r.status == 0);
    CHECK(r.out.find("expected mismatches 3, unexpected mismatches 0") != std::string::npos);
    r = run("--json audit " + src("fixtures"));
    CHECK(r.status == 0);
    CHECK(schema_valid("audit", r.out));

    const auto empty = std::filesystem::temp_directory_path() / "stabhom-cli-empty";
    std::filesystem::create_directories(empty);
    CHECK(run("audit " + empty.string()).status == 2);

    const auto bad = std::filesystem::temp_directory_path() / "stabhom-cli-bad";
    std::filesystem::remove_all(bad);
    std::filesystem::create_directories(bad);
    std::ifstream in(src("fixtures/chsh.json"));
    nlohmann::json f = nlohmann::json::parse(in);
    for (auto& c : f.at("claims")) {
      if (c.at("kind") == "lhv") c["value"] = 3;
    }
    std::ofstream(bad / "chsh.json") << f.dump(2);
    CHECK(run("audit " + bad.string()).status == 1);
    std::filesystem::remove_all(bad);
    std::filesystem::remove_all(empty);
  }
}
