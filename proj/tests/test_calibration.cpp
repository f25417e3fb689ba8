#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"

using namespace sfq;

namespace {
const std::string shipped = std::string(SFQCDC_SOURCE_DIR) + "/examples_cfg/calibration.cfg";
}

TEST(Calibration, ShippedFileEqualsBuiltInDefaults) {
  EXPECT_EQ(Calibration::load(shipped).serialize(), Calibration::defaults().serialize());
}

TEST(Calibration, SerializeRoundTrips) {
  Calibration c;
  c.dro.tau = 2.5;
  c.delay.splitter = SimTime::parse_ps("0.9");
  c.area.per_cell[CellKind::Dro] = 11.25;
  c.area.jtl_jj = 3;
  EXPECT_EQ(Calibration::parse(c.serialize()).serialize(), c.serialize());
}

TEST(Calibration, CharacterizationModelFromAnchors) {
  const auto m = Calibration{}.characterization();
  EXPECT_NEAR(*m.clock_to_q(2.1), 8.91, 1e-9);
  EXPECT_NEAR(*m.clock_to_q(1.8), 18.0, 1e-9);
}

TEST(Calibration, DroAnchorsRefitTheInCircuitLaw) {
  const auto c = Calibration::parse("dro.delta_fail = 0.5\ndro.anchors = 1.0:12, 0.8:15\n");
  EXPECT_NEAR(*c.dro.clock_to_q(1.0), 12.0, 1e-9);
  EXPECT_NEAR(*c.dro.clock_to_q(0.8), 15.0, 1e-9);
}

TEST(Calibration, ErrorsCarryLineAndColumn) {
  try {
    Calibration::parse("# c\ndelay.jtl = 3\ndelay.jlt = 3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(Calibration::parse("delay.jtl = -1\n"), ParseError);
  EXPECT_THROW(Calibration::parse("delay.jtl = 0\n"), ParseError);
  EXPECT_THROW(Calibration::parse("dro.tau = x\n"), ParseError);
  EXPECT_THROW(Calibration::parse("dro.tau = -2\n"), ConfigError);
  EXPECT_THROW(Calibration::parse("area.nand = 1\n"), ParseError);
  EXPECT_THROW(Calibration::parse("jj.jtl = 2.5\n"), ParseError);
  EXPECT_THROW(Calibration::parse("just words\n"), ParseError);
  EXPECT_THROW(Calibration::parse("char.anchors = 2.1:8.91\n"), ConfigError);
}

TEST(Calibration, LoadAndResolve) {
  EXPECT_THROW(Calibration::load("/nonexistent/cal.cfg"), ConfigError);
  const auto dir = std::filesystem::temp_directory_path() / "sfqcdc_cal_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "c.cfg").string();
  std::ofstream(path) << "delay.jtl = 4.5\n";
  EXPECT_EQ(Calibration::resolve(path).delay.jtl, SimTime::ps(4.5));
  ::setenv(calibration_env_var, path.c_str(), 1);
  EXPECT_EQ(Calibration::resolve("").delay.jtl, SimTime::ps(4.5));
  ::unsetenv(calibration_env_var);
  EXPECT_EQ(Calibration::resolve("").delay.jtl, SimTime::ps(3));
  std::ofstream(path) << "delay.jtl = nope\n";
  EXPECT_THROW(Calibration::load(path), ConfigError);
}
