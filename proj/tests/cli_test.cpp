#include "cli.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stokeshdg::cli {
namespace {

int parse(std::vector<const char*> argv, RunConfig& config) {
  argv.insert(argv.begin(), "stokes-hdg");
  return parse_args(static_cast<int>(argv.size()), argv.data(), config);
}

std::string run_to_string(const RunConfig& config) {
  std::ostringstream out;
  const int code = run(config, out);
  EXPECT_EQ(code, 0);
  return out.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

TEST(ParseArgs, DefaultsAndOverrides) {
  RunConfig c;
  EXPECT_EQ(parse({"solve"}, c), -1);
  EXPECT_EQ(c.command, "solve");
  EXPECT_EQ(c.k, 1);
  EXPECT_EQ(c.mesh_n, 4);
  EXPECT_EQ(c.levels, 4);
  EXPECT_EQ(c.nu, 1.0);
  EXPECT_EQ(c.mode, "relaxed");
  EXPECT_EQ(c.variant, "basic");
  EXPECT_FALSE(c.reconstruct);
  EXPECT_EQ(c.lambda, 4.0);
  EXPECT_FALSE(c.reduced_space);
  EXPECT_EQ(c.format, "csv");

  RunConfig d;
  EXPECT_EQ(parse({"convergence", "--k", "3", "--levels", "2", "--nu", "1e-3",
                   "--variant", "pr", "--mode", "relaxed", "--reconstruct",
                   "--lambda", "6", "--format", "json", "--mesh-n", "8",
                   "--nus", "1e-4,1e-2,1"},
                  d),
            -1);
  EXPECT_EQ(d.command, "convergence");
  EXPECT_EQ(d.k, 3);
  EXPECT_EQ(d.levels, 2);
  EXPECT_DOUBLE_EQ(d.nu, 1e-3);
  EXPECT_EQ(d.variant, "pr");
  EXPECT_TRUE(d.reconstruct);
  EXPECT_DOUBLE_EQ(d.lambda, 6.0);
  EXPECT_EQ(d.format, "json");
  EXPECT_EQ(d.mesh_n, 8);
  ASSERT_EQ(d.nus.size(), 3u);
  EXPECT_DOUBLE_EQ(d.nus[1], 1e-2);
}

TEST(ParseArgs, RejectsBadInputAndHandlesHelp) {
  RunConfig c;
  EXPECT_GE(parse({"frobnicate"}, c), 1);  // unknown command
  RunConfig d;
  EXPECT_GE(parse({"solve", "--bogus"}, d), 1);  // unknown flag
  RunConfig e;
  EXPECT_GE(parse({"solve", "--k", "0"}, e), 1);  // out of range
  RunConfig h;
  EXPECT_EQ(parse({"--help"}, h), 0);
  RunConfig m;
  EXPECT_GE(parse({}, m), 1);  // the command is required
}

TEST(ParseArgs, ConfigFileValuesAreOverriddenByFlags) {
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "stokes_hdg_cli_test.cfg";
  {
    std::ofstream f(path);
    f << "k = 3\nmode = full\n";
  }
  RunConfig c;
  const std::string path_str = path.string();
  EXPECT_EQ(parse({"counts", "--config", path_str.c_str(), "--k", "2"}, c), -1);
  EXPECT_EQ(c.k, 2);  // the explicit flag wins
  EXPECT_EQ(c.mode, "full");
  std::filesystem::remove(path);
}

TEST(Run, RejectsPressureRobustInFullMode) {
  RunConfig c;
  c.command = "solve";
  c.variant = "pr";
  c.mode = "full";
  std::ostringstream out;
  EXPECT_THROW(run(c, out), std::invalid_argument);
}

TEST(Run, CountsSchemaAndRelaxationIdentities) {
  RunConfig c;
  c.command = "counts";
  c.k = 1;
  c.mesh_n = 4;
  c.mode = "relaxed";
  const auto rel = parse_csv(run_to_string(c));
  c.mode = "full";
  const auto full = parse_csv(run_to_string(c));
  ASSERT_EQ(rel.size(), 2u);
  ASSERT_EQ(rel[0], (std::vector<std::string>{"k", "n", "mode", "dofs",
                                              "gdofs", "nze"}));
  // The n = 4 structured mesh has 40 interior facets; relaxation trades one
  // shared unknown per interior facet for two element-local ones.
  const long dofs_rel = std::stol(rel[1][3]);
  const long dofs_full = std::stol(full[1][3]);
  const long gdofs_rel = std::stol(rel[1][4]);
  const long gdofs_full = std::stol(full[1][4]);
  EXPECT_EQ(gdofs_full - gdofs_rel, 40);
  EXPECT_EQ(dofs_rel - dofs_full, 40);
  EXPECT_LT(std::stoll(rel[1][5]), std::stoll(full[1][5]));
}

TEST(Run, OutputIsDeterministic) {
  RunConfig c;
  c.command = "convergence";
  c.k = 1;
  c.levels = 2;
  const std::string a = run_to_string(c);
  const std::string b = run_to_string(c);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.empty());
}

TEST(Run, ConvergenceCsvContract) {
  RunConfig c;
  c.command = "convergence";
  c.k = 2;
  c.levels = 4;
  c.nu = 1e-3;
  c.variant = "pr";
  const std::string text = run_to_string(c);
  const auto rows = parse_csv(text);
  ASSERT_EQ(rows.size(), 5u);  // header + 4 levels
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "level,h,elements,dofs,gdofs,nze,l2_u,h1_u,l2_p,div_l2,jump_n,"
            "rate_l2_u,rate_h1_u");
  // Doubles are written with 16 significant digits in scientific notation.
  const std::regex sci(R"(-?\d\.\d{15}e[+-]\d{2,3})");
  EXPECT_TRUE(std::regex_match(rows[1][1], sci)) << rows[1][1];
  EXPECT_NEAR(std::stod(rows[1][1]), std::sqrt(2.0) / 2.0, 1e-12);
  for (size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 13u);
    EXPECT_EQ(std::stol(rows[i][0]), static_cast<long>(i - 1));
  }
  const double last_rate = std::stod(rows.back().back());
  EXPECT_GT(last_rate, 1.8);
  EXPECT_LT(last_rate, 2.2);
  // The pressure-robust solution stays solenoidal on every level.
  for (size_t i = 1; i < rows.size(); ++i)
    EXPECT_LT(std::stod(rows[i][9]), 1e-9);
}

TEST(Run, JsonMirrorsCsv) {
  RunConfig c;
  c.command = "convergence";
  c.k = 1;
  c.levels = 2;
  const auto csv = parse_csv(run_to_string(c));
  c.format = "json";
  const nlohmann::json doc = nlohmann::json::parse(run_to_string(c));
  EXPECT_EQ(doc.at("command"), "convergence");
  ASSERT_EQ(doc.at("columns").size(), csv[0].size());
  for (size_t i = 0; i < csv[0].size(); ++i)
    EXPECT_EQ(doc.at("columns")[i], csv[0][i]);
  ASSERT_EQ(doc.at("rows").size(), csv.size() - 1);
  for (size_t r = 0; r < doc.at("rows").size(); ++r) {
    const auto& rec = doc.at("rows")[r];
    for (size_t col = 0; col < csv[0].size(); ++col) {
      const std::string& name = csv[0][col];
      const std::string& text = csv[r + 1][col];
      if (rec.at(name).is_number_integer())
        EXPECT_EQ(rec.at(name).get<long long>(), std::stoll(text));
      else {
        const double want = std::stod(text);  // CSV carries 16 digits
        const double got = rec.at(name).get<double>();
        EXPECT_NEAR(got, want, 1e-13 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST(Run, BasisCheckReportsTinyViolations) {
  RunConfig c;
  c.command = "basis-check";
  c.k = 4;
  const auto rows = parse_csv(run_to_string(c));
  ASSERT_EQ(rows[0], (std::vector<std::string>{"dim", "k", "facet_gram_offdiag",
                                               "volume_moment"}));
  ASSERT_EQ(rows.size(), 1u + 4u + 4u);  // 2D k=1..4 and 3D k=1..4
  for (size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(std::stod(rows[i][2]), 1e-12) << "row " << i;
    EXPECT_LT(std::stod(rows[i][3]), 1e-12) << "row " << i;
  }
}

TEST(Run, SolveSchemaAndReconstructionFlag) {
  RunConfig c;
  c.command = "solve";
  c.k = 1;
  c.mesh_n = 2;
  const auto plain = parse_csv(run_to_string(c));
  ASSERT_EQ(plain.size(), 2u);
  ASSERT_EQ(plain[0].size(), 15u);
  EXPECT_EQ(plain[0][5], "reconstructed");
  EXPECT_EQ(plain[1][5], "0");
  c.reconstruct = true;
  const auto rec = parse_csv(run_to_string(c));
  EXPECT_EQ(rec[1][5], "1");
  const size_t jump_col = 13;  // jump_n
  EXPECT_EQ(plain[0][jump_col], "jump_n");
  EXPECT_LT(std::stod(rec[1][jump_col]), 1e-10);
  EXPECT_GT(std::stod(plain[1][jump_col]), 1e-8);
}

TEST(Run, WritesToFileAndHonorsThreadsVariable) {
  setenv("STOKES_HDG_THREADS", "2", 1);
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "stokes_hdg_cli_test_out.csv";
  RunConfig c;
  c.command = "counts";
  c.k = 2;
  c.mesh_n = 2;
  c.output = path.string();
  std::ostringstream fallback;
  EXPECT_EQ(run(c, fallback), 0);
  EXPECT_TRUE(fallback.str().empty());
  std::ifstream in(path);
  std::stringstream content;
  content << in.rdbuf();
  c.output.clear();
  EXPECT_EQ(content.str(), run_to_string(c));
  std::filesystem::remove(path);
  unsetenv("STOKES_HDG_THREADS");
}

TEST(Run, NuSweepSchema) {
  RunConfig c;
  c.command = "nu-sweep";
  c.k = 1;
  c.mesh_n = 2;
  c.nus = {1e-3, 1.0};
  const auto rows = parse_csv(run_to_string(c));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"nu", "h1_basic", "h1_pr"}));
  for (size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(std::stod(rows[i][1]), 0.0);
    EXPECT_GT(std::stod(rows[i][2]), 0.0);
  }
}

}  // namespace
}  // namespace stokeshdg::cli
