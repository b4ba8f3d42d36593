#include <gtest/gtest.h>

#include <random>
#include <set>

#include "hadas/architecture.hpp"
#include "hadas/materialize.hpp"
#include "oracles.hpp"

using namespace hadas;

namespace {

const Repository& repo() { return oracle::media_store(); }

Resolution alice() { return resolve(repo().tree, {{"Server", true}, {"LAME", true}, {"Cache", true}, {"AES", true}, {"GUI", true}}); }

std::set<std::string> keys(const std::map<ComponentId, Component>& m) {
  std::set<std::string> out;
  for (const auto& [k, v] : m) out.insert(k);
  return out;
}

// Components pulled in by a total resolution, computed from the fragment
// binding without going through materialize.
std::set<ComponentId> expected_components(const Resolution& r) {
  std::set<ComponentId> out;
  for (const auto& [vid, v] : repo().variants)
    if (v.fragment && r.is_true(v.choice))
      for (const auto& c : repo().fragments.at(*v.fragment).components) out.insert(c);
  return out;
}

ArchitectureConfiguration small_config() {
  ArchitectureConfiguration c;
  c.components["A"] = {"A", "Alpha", {}, {"I"}};
  c.components["B"] = {"B", "Beta \"quoted\"", {"I"}, {}};
  c.connectors.push_back({"A", "I", "B"});
  c.provenance["A"] = "x";
  return c;
}

}  // namespace

TEST(Materialize, AliceScenario) {
  const auto config = materialize(repo(), alice());
  EXPECT_TRUE(check_wellformed(config).clean());
  EXPECT_EQ(keys(config.components),
            (std::set<std::string>{"AESCipher", "CacheIndex", "LameEncoder", "MediaCache", "RemoteStore",
                                   "UploadManager", "WiFiUploader"}));
  std::set<ConcernId> concerns;
  for (const auto& [cid, choice] : config.provenance) concerns.insert(*repo().concern_of_choice(choice));
  EXPECT_EQ(concerns, (std::set<ConcernId>{"Store", "Compression", "DataAccess", "Security", "Communication"}));
  EXPECT_TRUE(config.open_ports.empty());
}

TEST(Materialize, EveryComponentHasProvenanceFromATrueChoice) {
  const auto r = alice();
  const auto config = materialize(repo(), r);
  EXPECT_EQ(keys(config.components).size(), config.provenance.size());
  for (const auto& [cid, choice] : config.provenance) {
    EXPECT_TRUE(config.components.count(cid));
    EXPECT_TRUE(r.is_true(choice)) << cid << " from " << choice;
    const auto& frag = repo().fragments.at(repo().binding().at(choice));
    EXPECT_NE(std::find(frag.components.begin(), frag.components.end(), cid), frag.components.end());
  }
}

TEST(Materialize, ComponentsAreUnionOfBoundFragments) {
  // Sampled valid products of the shipped tree: either an ambiguous store
  // provider, or the fragment union wired into a well-formed configuration.
  std::mt19937_64 rng(7);
  const auto all = enumerate_valid(repo().tree, 100000).resolutions;
  std::size_t checked = 0;
  for (std::size_t n = 0; n < 300; ++n) {
    const auto& r = all[std::uniform_int_distribution<std::size_t>(0, all.size() - 1)(rng)];
    try {
      const auto config = materialize(repo(), r);
      auto ks = keys(config.components);
      EXPECT_EQ(ks, expected_components(r));
      EXPECT_TRUE(check_wellformed(config).clean());
      ++checked;
    } catch (const AmbiguousProviderError& e) {
      EXPECT_EQ(e.interface_id(), "IAudioStore");
      EXPECT_GE(e.candidates().size(), 2u);
    }
  }
  EXPECT_GT(checked, 50u);
}

TEST(Materialize, MonotoneInTrueChoices) {
  const auto small = materialize(repo(), resolve(repo().tree, {{"Local", true}}));
  const auto large = materialize(repo(), resolve(repo().tree, {{"Local", true}, {"AES", true}, {"Cache", true}}));
  for (const auto& [id, c] : small.components) EXPECT_TRUE(large.components.count(id)) << id;
}

TEST(Materialize, SharedComponentsMergeOnce) {
  const auto config = materialize(repo(), alice());
  std::set<Connector> unique(config.connectors.begin(), config.connectors.end());
  EXPECT_EQ(unique.size(), config.connectors.size());
  EXPECT_TRUE(std::is_sorted(config.connectors.begin(), config.connectors.end()));
}

TEST(Materialize, AmbiguousProvider) {
  try {
    materialize(repo(), resolve(repo().tree, {{"Local", true}, {"Server", true}, {"Cache", true}}));
    FAIL();
  } catch (const AmbiguousProviderError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ambiguous_provider);
    EXPECT_EQ(e.interface_id(), "IAudioStore");
    EXPECT_EQ(e.candidates().size(), 2u);
  }
}

TEST(Materialize, UnprovidedRequirementBecomesOpenPort) {
  Repository r = repo();
  r.components["Extra"] = {"Extra", "Extra", {}, {"INowhere"}};
  r.fragments.at("frag.AES").components.push_back("Extra");
  const auto config = materialize(r, alice());
  EXPECT_TRUE(config.open_ports.count({"Extra", "INowhere"}));
  EXPECT_TRUE(check_wellformed(config).clean());
}

TEST(Materialize, EmptyResolutionGivesEmptyConfiguration) {
  const auto config = materialize(repo(), resolve(repo().tree, {}));
  EXPECT_TRUE(config.empty());
  EXPECT_TRUE(config.connectors.empty());
}

TEST(Materialize, RejectsPartialAndInvalidResolutions) {
  try {
    materialize(repo(), Resolution{{"HADAS", true}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_resolution);
  }
  Resolution bad = alice();
  bad.set("Communication", false);
  bad.set("WiFi", false);
  try {
    materialize(repo(), bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_resolution);
    EXPECT_FALSE(e.details().empty());
  }
}

TEST(Wellformed, DetectsBrokenConnectors) {
  auto c = small_config();
  EXPECT_TRUE(check_wellformed(c).clean());

  auto dup = c;
  dup.connectors.push_back({"A", "I", "B"});
  EXPECT_FALSE(check_wellformed(dup).clean());

  auto missing = c;
  missing.connectors.push_back({"A", "I", "Z"});
  EXPECT_EQ(check_wellformed(missing).findings.size(), 1u);

  auto mismatch = c;
  mismatch.connectors = {{"B", "I", "A"}};
  const auto report = check_wellformed(mismatch);
  EXPECT_GE(report.findings.size(), 3u);  // B does not require, A does not provide, A left unwired

  auto unwired = c;
  unwired.connectors.clear();
  EXPECT_EQ(check_wellformed(unwired).findings.size(), 1u);
  unwired.open_ports.insert({"A", "I"});
  EXPECT_TRUE(check_wellformed(unwired).clean());
}

TEST(Export, NativeRoundTrip) {
  for (const auto& config : {small_config(), materialize(repo(), alice()), ArchitectureConfiguration{}}) {
    const auto text = export_configuration(config, ConfigFormat::native);
    auto back = parse_configuration(text);
    std::sort(back.connectors.begin(), back.connectors.end());
    auto sorted = config;
    std::sort(sorted.connectors.begin(), sorted.connectors.end());
    EXPECT_EQ(back, sorted);
    EXPECT_EQ(export_configuration(back, ConfigFormat::native), text);
  }
}

TEST(Export, DeterministicAndEscaped) {
  const auto config = materialize(repo(), alice());
  EXPECT_EQ(export_configuration(config, ConfigFormat::dot), export_configuration(config, ConfigFormat::dot));

  const auto dot = export_configuration(small_config(), ConfigFormat::dot);
  EXPECT_NE(dot.find("\"A\" [label=\"Alpha\\n[x]\"];"), std::string::npos) << dot;
  EXPECT_NE(dot.find("\"B\" [label=\"Beta \\\"quoted\\\"\"];"), std::string::npos) << dot;
  EXPECT_NE(dot.find("\"A\" -> \"B\" [label=\"I\"];"), std::string::npos) << dot;
}

TEST(Export, EmptyDotHasNoNodes) {
  EXPECT_EQ(export_configuration(ArchitectureConfiguration{}, ConfigFormat::dot), "digraph configuration {\n}\n");
}

TEST(Export, RejectsForeignDocuments) {
  EXPECT_THROW(parse_configuration("not json"), Error);
  try {
    parse_configuration(R"({"format":"other","schema_version":"1"})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schema_error);
  }
}
