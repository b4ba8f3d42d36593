#include <gtest/gtest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "hadas/repository.hpp"
#include "oracles.hpp"

using namespace hadas;
namespace fs = std::filesystem;

namespace {

const Repository& repo() { return oracle::media_store(); }

std::set<ConcernId> concern_set(const std::vector<KeywordMatch>& ms) {
  std::set<ConcernId> out;
  for (const auto& m : ms) out.insert(m.concern);
  return out;
}

void edit_json(const fs::path& file, const std::function<void(nlohmann::json&)>& fn) {
  auto j = nlohmann::json::parse(oracle::read_file(file));
  fn(j);
  std::ofstream(file, std::ios::binary) << j.dump(2) << "\n";
}

ErrorCode load_error(const fs::path& dir, std::vector<std::string>* details = nullptr) {
  try {
    load_repository(dir);
  } catch (const Error& e) {
    if (details) *details = e.details();
    return e.code();
  }
  ADD_FAILURE() << "load succeeded";
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST(Load, ShippedDataset) {
  EXPECT_EQ(repo().version, "1");
  EXPECT_EQ(repo().name, "media-store");
  EXPECT_EQ(repo().concerns.size(), 10u);
  EXPECT_EQ(repo().tree.choices.size(), 24u);
  EXPECT_EQ(repo().energy_functions.size(), 5u);
  EXPECT_EQ(repo().size_transforms.size(), 4u);
}

TEST(Load, MissingDirectoryIsParseError) {
  EXPECT_EQ(load_error("/nonexistent/hadas"), ErrorCode::parse_error);
}

TEST(Load, MissingFileIsParseError) {
  const auto dir = oracle::copy_dataset("missing");
  fs::remove(dir / "variants.json");
  EXPECT_EQ(load_error(dir), ErrorCode::parse_error);
}

TEST(Load, WrongSchemaVersion) {
  const auto dir = oracle::copy_dataset("version");
  edit_json(dir / "manifest.json", [](auto& j) { j["schema_version"] = "2"; });
  EXPECT_EQ(load_error(dir), ErrorCode::schema_error);
}

TEST(Load, SyntaxErrorReportsLine) {
  const auto dir = oracle::copy_dataset("syntax");
  std::ofstream(dir / "concerns.json", std::ios::binary) << "{\n  \"concerns\": [\n    {,\n  ]\n}\n";
  std::vector<std::string> details;
  EXPECT_EQ(load_error(dir, &details), ErrorCode::parse_error);
  ASSERT_EQ(details.size(), 2u);
  EXPECT_EQ(details[0], "concerns.json");
  EXPECT_EQ(details[1], "line 3");
}

TEST(Load, BrokenReferenceIsIntegrityError) {
  const auto dir = oracle::copy_dataset("dangling");
  edit_json(dir / "variants.json", [](auto& j) {
    for (auto& v : j["variants"])
      if (v["id"] == "LAME") v["energy"] = "energy.missing";
  });
  std::vector<std::string> details;
  EXPECT_EQ(load_error(dir, &details), ErrorCode::integrity_error);
  bool named = false;
  for (const auto& d : details) named = named || d.find("energy.missing") != std::string::npos;
  EXPECT_TRUE(named);
}

TEST(Load, WrongFieldTypeNamesFileAndPath) {
  const auto dir = oracle::copy_dataset("types");
  edit_json(dir / "tree.json", [](auto& j) { j["choices"][0]["kind"] = 7; });
  try {
    load_repository(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::schema_error || e.code() == ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("tree.json"), std::string::npos) << e.what();
  }
}

TEST(Load, TreeProblemsAreIntegrityErrors) {
  const auto dir = oracle::copy_dataset("tree");
  edit_json(dir / "tree.json", [](auto& j) {
    j["constraints"].push_back({{"id", "bad"}, {"kind", "implies"}, {"antecedent", "Server"}, {"consequent", "X"}});
  });
  std::vector<std::string> details;
  EXPECT_EQ(load_error(dir, &details), ErrorCode::integrity_error);
  bool named = false;
  for (const auto& d : details) named = named || d.find("unknown choice X") != std::string::npos;
  EXPECT_TRUE(named);
}

// --- canonical serialization -----------------------------------------------

TEST(Serialize, ShippedFilesAreCanonical) {
  for (const auto& [file, text] : serialize_repository(repo()))
    EXPECT_EQ(text, oracle::read_file(fs::path(HADAS_DATA_DIR) / file)) << file;
}

TEST(Serialize, SaveThenLoadRoundTrips) {
  const auto dir = fs::temp_directory_path() / ("hadas-test-save-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  save_repository(repo(), dir);
  const auto again = load_repository(dir);
  EXPECT_EQ(again, repo());
  EXPECT_EQ(serialize_repository(again), serialize_repository(repo()));
}

// --- catalog queries --------------------------------------------------------

TEST(Catalog, ListConcernsInIdOrder) {
  const auto list = list_concerns(repo());
  ASSERT_EQ(list.size(), 10u);
  for (std::size_t i = 1; i < list.size(); ++i) EXPECT_LT(list[i - 1].id, list[i].id);
  for (const auto& c : list) EXPECT_FALSE(c.keywords.empty()) << c.id;
}

TEST(Catalog, MediaStoreRequirementsSuggestFiveConcerns) {
  const std::string text =
      "The Media Store offers storage for audio files. Users upload songs and download them; a cache keeps "
      "recent tracks. Users login with a password and files are encrypted. Tracks are encoded, then "
      "compressed before sending. A GUI interface lists the catalog.";
  const auto hits = match_keywords(repo(), text);
  const std::set<ConcernId> expected{"Store", "DataAccess", "Security", "Compression", "UserInterface"};
  EXPECT_EQ(concern_set(hits), expected);

  const auto exact = match_keywords(
      repo(), "storage, upload, download, cache, users, login, encrypted, encode, compressed, GUI, interface");
  EXPECT_EQ(concern_set(exact), expected);
}

TEST(Catalog, MatchOrderAndEmptyCases) {
  EXPECT_TRUE(match_keywords(repo(), "").empty());
  EXPECT_TRUE(match_keywords(repo(), "teleportation quantum banana").empty());
  const auto hits = match_keywords(repo(), "Upload and STORE, then save; also cache");
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].concern, "Store");
  EXPECT_EQ(hits[0].matched, (std::vector<std::string>{"save", "store", "upload"}));
  EXPECT_EQ(hits[1].concern, "DataAccess");
}

TEST(Catalog, KeywordIndexIsUnionOfConcernKeywords) {
  for (const auto& [id, c] : repo().concerns) {
    for (const auto& k : c.keywords) {
      const auto hits = match_keywords(repo(), "xx " + k + " yy");
      bool found = false;
      for (const auto& h : hits) {
        EXPECT_FALSE(h.matched.empty());
        found = found || (h.concern == id && h.matched == std::vector<std::string>{k});
      }
      EXPECT_TRUE(found) << id << " / " << k;
    }
  }
}

TEST(Catalog, Tokenize) {
  EXPECT_EQ(tokenize("Hello, World! x2-y"), (std::vector<std::string>{"hello", "world", "x2", "y"}));
  EXPECT_TRUE(tokenize(" ,.;").empty());
}

TEST(Catalog, VariantsOf) {
  auto ids = [](const std::vector<Variant>& vs) {
    std::vector<std::string> out;
    for (const auto& v : vs) out.push_back(v.id);
    return out;
  };
  EXPECT_EQ(ids(variants_of(repo(), "Compression")), (std::vector<std::string>{"LAME", "Vorbis", "jFLAC", "JSpeex"}));
  EXPECT_EQ(ids(variants_of(repo(), "Store")), (std::vector<std::string>{"Local", "ExternalDrive", "Server", "Cloud"}));
  EXPECT_EQ(ids(variants_of(repo(), "Notification")), (std::vector<std::string>{"NotificationBaseline"}));
  try {
    variants_of(repo(), "Teleportation");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_concern);
  }
}

TEST(Catalog, ConcernOfChoiceAndBinding) {
  EXPECT_EQ(repo().concern_of_choice("Server"), std::optional<ConcernId>("Store"));
  EXPECT_EQ(repo().concern_of_choice("Communication"), std::optional<ConcernId>("Communication"));
  EXPECT_FALSE(repo().concern_of_choice("HADAS").has_value());
  const auto b = repo().binding();
  EXPECT_EQ(b.at("Server"), "frag.Server");
  EXPECT_FALSE(b.count("GUI"));
}
