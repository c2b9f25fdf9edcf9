#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "afgd/scenario_file.hpp"

using namespace afgd;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(AFGD_SOURCE_DIR) / "scenarios";

int error_line(std::string_view text) {
  try {
    parse_scenario(text, "t.toml");
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

std::string error_key(std::string_view text) {
  try {
    parse_scenario(text, "t.toml");
  } catch (const ParseError& e) {
    return e.key();
  }
  return "<no error>";
}

constexpr std::string_view kMinimal = R"(name = "mini"
[objective]
kind = "quadratic"
q = [[1, 0], [0, 2]]
[methods.gd]
method = "gd"
[seeds]
x0 = [1, 1]
x1 = [1, 1]
)";

}  // namespace

TEST(ScenarioFile, ShippedFilesMatchBuiltins) {
  EXPECT_EQ(load_scenario(kScenarios / "sim1.toml"), simulation1_scenario());
  EXPECT_EQ(load_scenario(kScenarios / "sim2.toml"), simulation2_scenario());
  EXPECT_EQ(load_scenario(kScenarios / "sim3.toml"), simulation3_scenario());
}

TEST(ScenarioFile, MinimalDefaults) {
  const auto s = parse_scenario(kMinimal);
  EXPECT_EQ(s.name, "mini");
  ASSERT_EQ(s.methods.size(), 1u);
  EXPECT_EQ(s.methods[0].name, "gd");
  EXPECT_EQ(s.methods[0].config.alpha, 0.1);
  EXPECT_EQ(s.methods[0].config.k_max, 1000);
  const auto& q = std::get<QuadraticSpec>(s.objective);
  EXPECT_EQ(q.b, Vector(2));
  EXPECT_EQ(q.c, 0.0);
  EXPECT_FALSE(q.bounds_override.has_value());
}

TEST(ScenarioFile, StopTableFillsUnsetMethodFields) {
  std::string text(kMinimal);
  text += "[stop]\nepsilon = 1e-3\nk_max = 7\n[methods.other]\nmethod = \"gd\"\nk_max = 3\n";
  const auto s = parse_scenario(text);
  EXPECT_EQ(s.methods[0].config.epsilon, 1e-3);
  EXPECT_EQ(s.methods[0].config.k_max, 7);
  EXPECT_EQ(s.methods[1].config.k_max, 3);
  EXPECT_EQ(s.methods[1].config.epsilon, 1e-3);
}

TEST(ScenarioFile, BoundsOverrideNeedsBoth) {
  std::string text(kMinimal);
  const auto pos = text.find("[methods.gd]");
  std::string both = text;
  both.insert(pos, "m = 2\nL = 8\n");
  const auto& q = std::get<QuadraticSpec>(parse_scenario(both).objective);
  EXPECT_EQ(q.bounds_override, (SmoothnessBounds{2.0, 8.0}));
  std::string one = text;
  one.insert(pos, "m = 2\n");
  EXPECT_EQ(error_key(one), "L");
}

TEST(ScenarioFile, UnknownKeyReportsLineAndKey) {
  std::string text(kMinimal);
  text.insert(text.find("[seeds]"), "alpah = 0.3\n");
  EXPECT_EQ(error_key(text), "alpah");
  EXPECT_EQ(error_line(text), 7);
}

TEST(ScenarioFile, UnknownTable) {
  std::string text(kMinimal);
  text += "[extra]\nx = 1\n";
  EXPECT_EQ(error_key(text), "extra");
  EXPECT_EQ(error_line(text), 10);
}

TEST(ScenarioFile, BadValuesReportKey) {
  std::string text(kMinimal);
  text.replace(text.find("\"gd\""), 4, "\"adam\"");
  EXPECT_EQ(error_key(text), "method");
  EXPECT_EQ(error_line(text), 6);

  text = kMinimal;
  text.replace(text.find("[[1, 0], [0, 2]]"), 16, "[[1, 3], [0, 2]]");
  EXPECT_EQ(error_key(text), "q");

  text = kMinimal;
  text.replace(text.find("x1 = [1, 1]"), 11, "x1 = [1, \"a\"]");
  EXPECT_EQ(error_key(text), "x1");
  EXPECT_EQ(error_line(text), 9);
}

TEST(ScenarioFile, SyntaxErrorsCarryLine) {
  EXPECT_EQ(error_line("name = \"x\"\n[objective\nkind = 1\n"), 2);
  EXPECT_EQ(error_line("name = \"x\"\n\nbroken line\n"), 3);
  EXPECT_EQ(error_line("name = \"x\"\nname = \"y\"\n"), 2);
}

TEST(ScenarioFile, MissingTables) {
  EXPECT_EQ(error_key("name = \"x\"\n"), "objective");
  std::string text(kMinimal);
  text = text.substr(0, text.find("[seeds]"));
  EXPECT_EQ(error_key(text), "seeds");
}

TEST(ScenarioFile, RegressionCsvResolvesAgainstFileDirectory) {
  const auto s = parse_scenario(
      "[objective]\nkind = \"regression\"\ncsv = \"pts.csv\"\n"
      "[methods.n]\nmethod = \"nesterov\"\n[seeds]\nx0 = [0, 0]\nx1 = [0, 0]\n",
      "f.toml", "/data/dir");
  EXPECT_EQ(std::get<RegressionSpec>(s.objective).csv, "/data/dir/pts.csv");
}

TEST(ScenarioFile, MissingFileIsIoError) {
  EXPECT_THROW(load_scenario(kScenarios / "does_not_exist.toml"), IoError);
}
