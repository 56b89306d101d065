#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tinyrl/types.hpp"

using namespace tinyrl;

TEST_CASE("grpo with n=1 is a violation naming the constraint") {
  AlgoConfig cfg;
  cfg.kind = AlgoKind::kGrpo;
  cfg.mean_center = true;
  cfg.std_normalize = true;
  cfg.group_size = 1;
  auto rep = validate_config(cfg);
  CHECK(!rep.ok());
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.find("n>1") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("reinforce_rej with drop_both validates") {
  AlgoConfig cfg;
  cfg.kind = AlgoKind::kReinforceRej;
  cfg.filter = FilterKind::kDropBoth;
  CHECK(validate_config(cfg).ok());
}

TEST_CASE("clip-higher band validates") {
  AlgoConfig cfg;
  cfg.kind = AlgoKind::kRaftPp;
  cfg.eps_lo = 0.2;
  cfg.eps_hi = 0.28;
  CHECK(validate_config(cfg).ok());
}

TEST_CASE("eps_hi below eps_lo is rejected") {
  AlgoConfig cfg;
  cfg.eps_lo = 0.3;
  cfg.eps_hi = 0.2;
  CHECK(!validate_config(cfg).ok());
}

TEST_CASE("std_normalize without mean_center warns") {
  AlgoConfig cfg;
  cfg.kind = AlgoKind::kReinforceToken;
  cfg.std_normalize = true;
  auto rep = validate_config(cfg);
  CHECK(rep.ok());
  CHECK(!rep.warnings.empty());
}

TEST_CASE("kind round-trips through strings") {
  for (auto k : {AlgoKind::kRaft, AlgoKind::kRaftPp, AlgoKind::kReinforceSentence,
                 AlgoKind::kReinforceToken, AlgoKind::kGrpo, AlgoKind::kReinforceRej,
                 AlgoKind::kDpoIter}) {
    auto back = algo_kind_from_string(to_string(k));
    REQUIRE(back.has_value());
    CHECK(*back == k);
  }
}
