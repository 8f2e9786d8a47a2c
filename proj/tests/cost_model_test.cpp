#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support/table_cells.hpp"
#include "trajexit/cost_model.hpp"

namespace trajexit {
namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(TRAJEXIT_SOURCE_DIR) + "/" + rel, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const DetectorProfile kNanoAbs = with_full_latency(yolov8_nano_profile(), 10.097);

TEST(LatencyFor, DeploymentFullAndP3) {
  const auto p = deployment_profile();
  EXPECT_EQ(latency_for(HeadSet::all(), p), 10.097);
  EXPECT_EQ(latency_for(HeadSet{Head::P3}, p), 6.686);
}

TEST(LatencyFor, DeploymentHasNoP4Measurement) {
  EXPECT_THROW(latency_for(HeadSet{Head::P4}, deployment_profile()), InputError);
}

TEST(LatencyFor, SpeedupDerivedLatency) {
  EXPECT_NEAR(latency_for(HeadSet{Head::P4}, kNanoAbs), 6.963, 0.01);
  EXPECT_EQ(latency_for(HeadSet{Head::P4}, kNanoAbs), 10.097 / 1.45);
}

TEST(LatencyFor, TableProfilesNeedAnAnchor) {
  EXPECT_THROW(latency_for(HeadSet::all(), yolov8_nano_profile()), InputError);
  EXPECT_THROW(latency_for(HeadSet{Head::P3}, yolov8_nano_profile()), InputError);
}

TEST(LatencyFor, SubsetsAreSlowestMember) {
  EXPECT_EQ(latency_for(HeadSet{Head::P3, Head::P5}, kNanoAbs), 10.097 / 1.34);
  EXPECT_THROW(latency_for(HeadSet{}, kNanoAbs), InputError);
}

TEST(LatencyFor, MonotoneUnderGrowth) {
  for (const auto& base : {yolov8_nano_profile(), yolov8_small_profile(), yolov8_medium_profile()}) {
    const auto p = with_full_latency(base, 12.0);
    for (std::uint8_t bits = 1; bits < 8; ++bits) {
      HeadSet s;
      for (Head h : kAllHeads) {
        if (bits & (1u << static_cast<unsigned>(h))) s = s.with(h);
      }
      EXPECT_LE(latency_for(s, p), p.full_latency_ms.value());
      for (Head h : kAllHeads) {
        EXPECT_LE(latency_for(s, p), latency_for(s.with(h), p)) << to_string(s) << " + " << to_string(h);
        EXPECT_GE(flops_savings_for(s, p), flops_savings_for(s.with(h), p));
      }
    }
  }
}

TEST(FlopsSavings, TableCells) {
  EXPECT_EQ(flops_savings_for(HeadSet{Head::P3}, yolov8_nano_profile()), 25.08);
  EXPECT_EQ(flops_savings_for(HeadSet::all(), yolov8_nano_profile()), 0.0);
  EXPECT_EQ(flops_savings_for(HeadSet{Head::P5}, yolov8_medium_profile()), 18.33);
  EXPECT_EQ(flops_savings_for(HeadSet{Head::P4, Head::P5}, yolov8_medium_profile()), 18.33);
}

TEST(ValidateProfile, BundledProfilesAreConsistent) {
  for (const auto& p : {yolov8_nano_profile(), yolov8_small_profile(), yolov8_medium_profile(), deployment_profile()}) {
    const auto r = validate_profile(p);
    EXPECT_TRUE(r.ok()) << p.model << ": " << (r.issues.empty() ? "" : r.issues.front());
  }
}

TEST(ValidateProfile, DetectionSumMismatch) {
  auto bad = yolov8_nano_profile();
  bad.heads[2].detections = 144;  // 168 + 277 + 144 = 589
  EXPECT_FALSE(validate_profile(bad).ok());
  EXPECT_NE(validate_profile(bad).issues.front().find("589"), std::string::npos);
}

TEST(ValidateProfile, SpeedupDisagreesWithLatency) {
  DetectorProfile p = deployment_profile();
  p.full_latency_ms = 13.0;
  p.heads[0].latency_ms = 10.0;  // ratio 1.3
  p.heads[0].speedup = 2.0;
  const auto r = validate_profile(p);
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_NE(r.issues[0].find("speedup"), std::string::npos);
}

TEST(ValidateProfile, StructuralProblems) {
  DetectorProfile p = yolov8_small_profile();
  p.heads.pop_back();
  EXPECT_FALSE(validate_profile(p).ok());
  p = yolov8_small_profile();
  p.heads[1].map50 = 1.2;
  p.heads[2].flops_savings_pct = 100.0;
  EXPECT_EQ(validate_profile(p).issues.size(), 2u);
}

TEST(ProfileJson, BundledFilesReserializeByteForByte) {
  const std::pair<const char*, DetectorProfile> files[] = {
      {"data/profiles/yolov8n.json", yolov8_nano_profile()},
      {"data/profiles/yolov8s.json", yolov8_small_profile()},
      {"data/profiles/yolov8m.json", yolov8_medium_profile()},
      {"data/profiles/deployment.json", deployment_profile()},
  };
  for (const auto& [path, builtin] : files) {
    const std::string text = slurp(path);
    ASSERT_FALSE(text.empty()) << path;
    const auto parsed = profile_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(parsed, builtin) << path;
    EXPECT_EQ(to_json(parsed).dump(2) + "\n", text) << path;
  }
}

TEST(ProfileJson, TableCellsMatchAtPrintedPrecision) {
  for (const auto& row : table_cells::kRows) {
    const auto p = *bundled_profile(row.key);
    EXPECT_EQ(table_cells::render(p), table_cells::expected(row)) << row.key;
  }
}

TEST(ProfileJson, RejectsMalformed) {
  EXPECT_THROW(profile_from_json(nlohmann::json::parse(R"({"heads": []})")), InputError);
  EXPECT_THROW(profile_from_json(nlohmann::json::parse(R"({"model": "x", "heads": [{"head": "P9"}]})")), InputError);
  EXPECT_THROW(profile_from_json(nlohmann::json::parse(R"({"model": "x", "heads": [{"head": "P3", "speedup": "fast"}]})")),
               InputError);
}

}  // namespace
}  // namespace trajexit
