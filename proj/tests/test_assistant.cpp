#include <gtest/gtest.h>

#include <array>
#include <atomic>
#include <functional>
#include <thread>

#include "hadas/assistant.hpp"
#include "oracles.hpp"

using namespace hadas;

namespace {

const std::set<ConcernId> kAliceConcerns{"Store", "Compression", "DataAccess", "Security", "UserInterface"};
const Resolution kAlicePicks{{"Server", true}, {"LAME", true}, {"Cache", true}, {"AES", true}, {"GUI", true}};
const std::vector<VariantId> kCodecs{"LAME", "Vorbis", "jFLAC", "JSpeex"};

std::shared_ptr<const Repository> shared_repo() {
  static auto repo = std::make_shared<const Repository>(oracle::media_store());
  return repo;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid_argument;
}

class AssistantTest : public ::testing::Test {
 protected:
  Assistant a{shared_repo()};

  // A fresh session advanced to `step` along Alice's path.
  std::string at_step(int step) {
    const auto id = a.create_session().id;
    if (step >= 2) a.select_concerns(id, kAliceConcerns);
    if (step >= 3) a.select_variants(id, kAlicePicks);
    if (step >= 4) a.analyze(id, {kCodecs});
    if (step >= 5) a.generate_configuration(id, kAlicePicks);
    EXPECT_EQ(a.get(id).step, step);
    return id;
  }
};

}  // namespace

TEST(Token, ShapeAndDistribution) {
  std::set<std::string> seen;
  std::array<std::size_t, 16> counts{};
  for (int i = 0; i < 2000; ++i) {
    const auto t = make_token();
    ASSERT_EQ(t.size(), 32u);
    for (char c : t) {
      const auto pos = std::string("0123456789abcdef").find(c);
      ASSERT_NE(pos, std::string::npos);
      ++counts[pos];
    }
    seen.insert(t);
  }
  EXPECT_EQ(seen.size(), 2000u);
  // 64000 nibbles: each digit expected 4000 times; a 10% band is > 6 sigma.
  for (auto n : counts) {
    EXPECT_GT(n, 3600u);
    EXPECT_LT(n, 4400u);
  }
}

TEST_F(AssistantTest, NewSessionsAreEmptyAndDistinct) {
  const auto s1 = a.create_session();
  const auto s2 = a.create_session();
  EXPECT_NE(s1.id, s2.id);
  EXPECT_EQ(s1.step, 1);
  EXPECT_TRUE(s1.selected_concerns.empty());
  EXPECT_TRUE(s1.selections.empty());
  EXPECT_FALSE(s1.config.has_value());
  EXPECT_EQ(a.session_ids().size(), 2u);
  EXPECT_EQ(code_of([&] { a.get("nope"); }), ErrorCode::unknown_session);
}

TEST_F(AssistantTest, StepStateMachine) {
  using Op = std::function<void(const std::string&)>;
  const std::vector<std::tuple<std::string, Op, std::set<int>>> ops{
      {"suggest", [&](const std::string& id) { a.suggest_concerns(id, "cache"); }, {1}},
      {"concerns", [&](const std::string& id) { a.select_concerns(id, kAliceConcerns); }, {1, 2}},
      {"variants", [&](const std::string& id) { a.select_variants(id, kAlicePicks); }, {2, 3}},
      {"analyze", [&](const std::string& id) { a.analyze(id, {kCodecs}); }, {3, 4}},
      {"generate", [&](const std::string& id) { a.generate_configuration(id, kAlicePicks); }, {4}},
  };
  for (int step = 1; step <= 5; ++step) {
    for (const auto& [name, op, allowed] : ops) {
      const auto id = at_step(step);
      const auto before = a.get(id);
      if (allowed.count(step)) {
        EXPECT_NO_THROW(op(id)) << name << " at " << step;
      } else {
        EXPECT_EQ(code_of([&] { op(id); }), ErrorCode::invalid_step) << name << " at " << step;
        EXPECT_EQ(a.get(id), before) << name << " at " << step;
      }
    }
  }
}

TEST_F(AssistantTest, SuggestsFromText) {
  const auto id = at_step(1);
  const auto hits = a.suggest_concerns(id, "encrypted upload over a cache");
  std::set<ConcernId> got;
  for (const auto& h : hits) got.insert(h.concern);
  EXPECT_EQ(got, (std::set<ConcernId>{"Security", "Store", "DataAccess"}));
}

TEST_F(AssistantTest, UnknownConcernRejected) {
  const auto id = at_step(1);
  EXPECT_EQ(code_of([&] { a.select_concerns(id, {"Store", "Teleport"}); }), ErrorCode::unknown_concern);
  EXPECT_EQ(a.get(id).step, 1);
}

TEST_F(AssistantTest, ServerDerivesCommunicationForm) {
  const auto id = a.create_session().id;
  a.select_concerns(id, {"Store"});
  const auto sel = a.select_variants(id, {{"Server", true}});
  EXPECT_TRUE(sel.propagated.is_true("Communication"));
  EXPECT_TRUE(sel.propagated.is_true("WiFi"));
  EXPECT_EQ(sel.session.derived_concerns, (std::set<ConcernId>{"Communication"}));
  ASSERT_EQ(sel.derived_forms.size(), 1u);
  const auto& form = sel.derived_forms.front();
  EXPECT_EQ(form.concern, "Communication");
  EXPECT_TRUE(form.derived);
  ASSERT_EQ(form.options.size(), 1u);
  EXPECT_EQ(form.options[0].variant, "WiFi");
  EXPECT_EQ(form.options[0].state, OptionState::selected);

  const auto forms = a.forms(id);
  ASSERT_EQ(forms.size(), 2u);
  EXPECT_EQ(forms[0].concern, "Store");
  for (const auto& o : forms[0].options)
    EXPECT_EQ(o.state, o.variant == "Server" ? OptionState::selected : OptionState::open) << o.variant;
}

TEST_F(AssistantTest, DerivedConcernsRecomputedOnEachSelection) {
  const auto id = a.create_session().id;
  a.select_concerns(id, {"Store"});
  a.select_variants(id, {{"Server", true}});
  const auto sel = a.select_variants(id, {{"Local", true}});
  EXPECT_TRUE(sel.session.derived_concerns.empty());
  EXPECT_TRUE(sel.derived_forms.empty());
  EXPECT_EQ(a.get(id).selections, (Resolution{{"Local", true}}));
}

TEST_F(AssistantTest, DerivedConcernsMatchRecomputation) {
  const auto id = a.create_session().id;
  a.select_concerns(id, {"Store"});
  const std::vector<Resolution> picks{Resolution{{"Server", true}}, Resolution{{"LAME", true}},
                                      Resolution{{"Cloud", true}, {"AES", true}}, Resolution{{"Local", true}},
                                      Resolution{}};
  for (const auto& p : picks) {
    const auto sel = a.select_variants(id, p);
    std::set<ConcernId> expected;
    const auto propagated = propagate(shared_repo()->tree, p);
    for (const auto& [choice, v] : propagated.decided()) {
      const auto owner = shared_repo()->concern_of_choice(choice);
      if (v && owner && *owner != "Store") expected.insert(*owner);
    }
    EXPECT_EQ(sel.session.derived_concerns, expected);
    EXPECT_EQ(sel.derived_forms.size(), expected.size());
  }
}

TEST_F(AssistantTest, ConflictReportsChainAndLeavesSessionAlone) {
  auto repo = std::make_shared<Repository>(oracle::media_store());
  repo->tree.constraints.push_back({"NoWiFi", "Server", "WiFi", ConstraintKind::excludes});
  Assistant b(repo);
  const auto id = b.create_session().id;
  b.select_concerns(id, {"Store"});
  const auto before = b.get(id);
  try {
    b.select_variants(id, {{"Server", true}});
    FAIL();
  } catch (const ConflictError& e) {
    EXPECT_FALSE(e.chain().empty());
    bool names_server = false;
    for (const auto& line : e.chain()) names_server = names_server || line.find("Server") != std::string::npos;
    EXPECT_TRUE(names_server);
  }
  EXPECT_EQ(b.get(id), before);
}

TEST_F(AssistantTest, AnalyzeAliceScenario) {
  const auto id = at_step(3);
  const auto r = a.analyze(id, {kCodecs});
  EXPECT_EQ(r.sweep.series.size(), 5u);
  for (const char* label : {"LAME+WiFi", "Vorbis+WiFi", "jFLAC+WiFi", "JSpeex+WiFi", "Uncompressed+WiFi"})
    EXPECT_TRUE(r.sweep.series.count(label)) << label;
  EXPECT_EQ(r.sweep.sizes.size(), 32u);
  EXPECT_EQ(r.reference, r.ranking.front().label);
  EXPECT_EQ(r.crossovers.size(), 4u);
  EXPECT_FALSE(r.crossovers.count(r.reference));
  for (const auto& [label, rows] : r.per_stage) {
    ASSERT_EQ(rows.size(), r.sweep.sizes.size());
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].total, r.sweep.series.at(label)[i]);
  }
  const auto s = a.get(id);
  EXPECT_EQ(s.step, 4);
  ASSERT_EQ(s.history.size(), 1u);
  EXPECT_EQ(s.selections, kAlicePicks);
}

TEST_F(AssistantTest, AnalyzeOutsideDomainNamesValidRange) {
  const auto id = at_step(3);
  try {
    a.analyze(id, {kCodecs, 1.0, 2.0, 4, Spacing::logarithmic});
    FAIL();
  } catch (const OutOfDomainError& e) {
    EXPECT_DOUBLE_EQ(e.valid_lo(), 5.0);
    EXPECT_DOUBLE_EQ(e.valid_hi(), 950.0);
  }
  EXPECT_EQ(a.get(id).step, 3);
  EXPECT_TRUE(a.get(id).history.empty());
}

TEST_F(AssistantTest, AnalyzeExcludedVariant) {
  const auto id = a.create_session().id;
  a.select_concerns(id, {"Compression"});
  a.select_variants(id, {{"LAME", true}, {"Vorbis", false}});
  EXPECT_EQ(code_of([&] { a.analyze(id, {{"Vorbis"}}); }), ErrorCode::variant_excluded);
  EXPECT_EQ(code_of([&] { a.analyze(id, {{"Local"}}); }), ErrorCode::no_energy_data);
  EXPECT_EQ(code_of([&] { a.analyze(id, {{"Nope"}}); }), ErrorCode::unknown_variant);
  EXPECT_EQ(code_of([&] { a.analyze(id, {{}}); }), ErrorCode::invalid_argument);
}

TEST_F(AssistantTest, SingleVariantSeriesIsItsEnergyFunction) {
  const auto id = a.create_session().id;
  a.select_concerns(id, {"Compression"});
  a.select_variants(id, {{"LAME", true}});
  const auto r = a.analyze(id, {{"LAME"}, 5.0, 950.0, 16, Spacing::linear});
  ASSERT_EQ(r.sweep.series.size(), 1u);
  const auto& f = shared_repo()->energy_functions.at("energy.LAME");
  for (std::size_t i = 0; i < r.sweep.sizes.size(); ++i)
    EXPECT_NEAR(r.sweep.series.at("LAME")[i], oracle::loglog(f.samples, r.sweep.sizes[i]), 1e-12);
  EXPECT_TRUE(r.crossovers.empty());
}

TEST_F(AssistantTest, RepeatedAnalysesAppendHistory) {
  const auto id = at_step(3);
  a.analyze(id, {kCodecs});
  a.analyze(id, {{"JSpeex"}, 10.0, 20.0, 3, Spacing::linear});
  const auto s = a.get(id);
  ASSERT_EQ(s.history.size(), 2u);
  EXPECT_EQ(s.history[1].variants, std::vector<VariantId>{"JSpeex"});
  EXPECT_EQ(s.selections, kAlicePicks);
}

TEST_F(AssistantTest, GenerateAliceConfiguration) {
  const auto id = at_step(4);
  const auto config = a.generate_configuration(id, kAlicePicks);
  EXPECT_TRUE(check_wellformed(config).clean());
  EXPECT_EQ(config.components.size(), 7u);
  const auto s = a.get(id);
  EXPECT_EQ(s.step, 5);
  ASSERT_TRUE(s.config.has_value());
  EXPECT_EQ(*s.config, config);
}

TEST_F(AssistantTest, GenerateFromNothingIsEmpty) {
  const auto id = at_step(4);
  EXPECT_TRUE(a.generate_configuration(id, {}).empty());
}

TEST_F(AssistantTest, FailedGenerateStaysAtAnalysis) {
  const auto id = at_step(4);
  EXPECT_EQ(code_of([&] { a.generate_configuration(id, {{"Server", true}, {"Communication", false}}); }),
            ErrorCode::conflict);
  EXPECT_EQ(code_of([&] { a.generate_configuration(id, {{"Local", true}, {"Server", true}, {"Cache", true}}); }),
            ErrorCode::ambiguous_provider);
  EXPECT_EQ(a.get(id).step, 4);
  EXPECT_FALSE(a.get(id).config.has_value());
}

TEST_F(AssistantTest, BackDropsLaterDecisions) {
  const auto id = at_step(5);
  auto s = a.back(id, 4);
  EXPECT_FALSE(s.config.has_value());
  EXPECT_EQ(s.history.size(), 1u);
  s = a.back(id, 2);
  EXPECT_TRUE(s.history.empty());
  EXPECT_TRUE(s.selections.empty());
  EXPECT_EQ(s.selected_concerns, kAliceConcerns);
  EXPECT_EQ(code_of([&] { a.back(id, 2); }), ErrorCode::invalid_step);
  EXPECT_EQ(code_of([&] { a.back(id, 0); }), ErrorCode::invalid_step);
  s = a.back(id, 1);
  EXPECT_TRUE(s.selected_concerns.empty());
  EXPECT_EQ(s.step, 1);
}

TEST_F(AssistantTest, SnapshotRestoreRoundTrip) {
  const auto id = at_step(5);
  const auto snap = a.snapshot();
  Assistant b(shared_repo());
  for (const auto& s : snap) b.restore(s);
  EXPECT_EQ(b.get(id), a.get(id));
  EXPECT_TRUE(a.remove(id));
  EXPECT_FALSE(a.remove(id));
}

TEST_F(AssistantTest, ConcurrentSessionsAreIndependent) {
  const Repository pristine = *shared_repo();
  std::atomic<int> failures{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (int i = 0; i < 10; ++i) {
          const auto id = a.create_session().id;
          a.select_concerns(id, kAliceConcerns);
          a.select_variants(id, kAlicePicks);
          const auto r = a.analyze(id, {kCodecs, 5.0, 950.0, static_cast<std::size_t>(8 + t)});
          if (r.sweep.sizes.size() != static_cast<std::size_t>(8 + t)) ++failures;
          if (a.generate_configuration(id, kAlicePicks).components.size() != 7) ++failures;
          if (a.get(id).history.size() != 1) ++failures;
        }
      } catch (...) {
        ++failures;
      }
    });
  }
  // Hammer one shared session with reads meanwhile.
  const auto shared = at_step(3);
  for (int i = 0; i < 50; ++i) a.forms(shared);
  for (auto& th : threads) th.join();
  EXPECT_EQ(failures.load(), 0);
  EXPECT_EQ(a.session_ids().size(), 81u);
  EXPECT_EQ(*shared_repo(), pristine);
}
