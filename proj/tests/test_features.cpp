#include <doctest.h>

#include <cmath>

#include "stcausal/features.hpp"
#include "stcausal/linalg.hpp"
#include "test_util.hpp"

using namespace stc;

TEST_CASE("encode_temporal matches hand-computed calendar values") {
  // 2017-01-02 00:00:00 UTC, a Monday
  auto monday = encode_temporal(1483315200);
  CHECK(monday[0] == 0.0);
  CHECK(monday[1] == 0.0);
  CHECK(monday[2] == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(monday[3] == doctest::Approx(2.0 / 31.0).epsilon(1e-15));

  // 2017-08-26 12:00:00 UTC, a Saturday
  auto saturday = encode_temporal(1503748800);
  CHECK(saturday[0] == 0.5);
  CHECK(saturday[1] == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
  CHECK(saturday[2] == doctest::Approx(8.0 / 12.0).epsilon(1e-15));
  CHECK(saturday[3] == doctest::Approx(26.0 / 31.0).epsilon(1e-15));

  // 1970-01-01 23:59:59 UTC, a Thursday
  auto epoch_eve = encode_temporal(86399);
  CHECK(epoch_eve[0] == doctest::Approx(23.0 / 24.0).epsilon(1e-15));
  CHECK(epoch_eve[1] == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
  CHECK(epoch_eve[2] == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(epoch_eve[3] == doctest::Approx(1.0 / 31.0).epsilon(1e-15));
}

TEST_CASE("encode_spatial layout and clamping") {
  TweetRecord rec;
  rec.bounding_box = parse_bounding_box("(29.7,-95.6),(29.7,-95.3),(29.9,-95.6),(29.9,-95.3)");
  rec.geolocation = "houston";
  rec.location_mentions = 3;

  auto s = encode_spatial(rec, 5);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 1.0);
  CHECK(s[2] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(s[3] == 0.0);
  CHECK(s[4] == doctest::Approx(29.8 / 90.0).epsilon(1e-12));
  CHECK(s[5] == doctest::Approx(-95.45 / 180.0).epsilon(1e-12));

  rec.location_mentions = 12;  // above the cap
  CHECK(encode_spatial(rec, 5)[2] == 1.0);
  CHECK(encode_spatial(rec, 0)[2] == 0.0);
  CHECK(encode_spatial(rec, 5, 0.25)[3] == 0.25);

  TweetRecord bare;
  auto b = encode_spatial(bare, 5);
  for (double x : b) CHECK(x == 0.0);
}

TEST_CASE("combine_trigger_cls is the weighted sum") {
  std::vector<double> trig{1.0, 0.0, -2.0};
  std::vector<double> cls{0.0, 1.0, 2.0};
  auto out = combine_trigger_cls(trig, cls, 0.7);
  CHECK(out[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(out[2] == doctest::Approx(0.7 * -2.0 + 0.3 * 2.0).epsilon(1e-15));

  CHECK_THROWS_AS(combine_trigger_cls(trig, {1.0}, 0.7), ValidationError);
}

TEST_CASE("fuse_features concatenates and segments slice correctly") {
  std::vector<double> sem{9.0, 8.0};
  std::array<double, kTemporalDim> tem{0.1, 0.2, 0.3, 0.4};
  std::array<double, kSpatialDim> spa{1.0, 0.0, 0.5, 0.0, 0.3, -0.5};
  auto fused = fuse_features(sem, tem, spa);
  REQUIRE(fused.size() == 2 + kTemporalDim + kSpatialDim);

  auto s = semantic_segment(fused, 2);
  auto t = temporal_segment(fused, 2);
  auto p = spatial_segment(fused, 2);
  CHECK(s.size() == 2);
  CHECK(t.size() == kTemporalDim);
  CHECK(p.size() == kSpatialDim);
  CHECK(s[0] == 9.0);
  CHECK(t[0] == 0.1);
  CHECK(t[3] == 0.4);
  CHECK(p[0] == 1.0);
  CHECK(p[5] == -0.5);
  CHECK(s.data() == fused.data());
  CHECK(p.data() + p.size() == fused.data() + fused.size());
}

TEST_CASE("hash_embed is deterministic, unit norm, and family separated") {
  auto a = hash_embed("flooding downtown", 32, 7, 1);
  auto b = hash_embed("flooding downtown", 32, 7, 1);
  CHECK(a == b);
  CHECK(std::abs(l2_norm(a) - 1.0) <= 1e-12);

  CHECK(hash_embed("flooding downtown", 32, 7, 2) != a);
  CHECK(hash_embed("flooding downtown", 32, 8, 1) != a);
  CHECK(hash_embed("flooding uptown", 32, 7, 1) != a);

  // degenerate inputs still produce unit vectors
  CHECK(std::abs(l2_norm(hash_embed("", 16, 3, 0)) - 1.0) <= 1e-12);
  CHECK(std::abs(l2_norm(hash_embed("a", 16, 3, 0)) - 1.0) <= 1e-12);
  CHECK(std::abs(l2_norm(hash_embed("x", 1, 3, 0)) - 1.0) <= 1e-12);

  CHECK_THROWS_AS(hash_embed("x", 0, 1), ConfigError);
}

TEST_CASE("event_key separates tweet and event ids unambiguously") {
  CHECK(event_key("a", "b") == std::string("a\x1f") + "b");
  CHECK(event_key("ab", "") != event_key("a", "b"));
  CHECK(event_key("t1", "e2") != event_key("t1e", "2"));
}

TEST_CASE("EmbeddingTable insert, lookup, and failure modes") {
  EmbeddingTable table;
  table.insert("t1", "e1", {1.0, 0.0}, {0.0, 1.0});
  CHECK(table.dim() == 2);
  CHECK(table.size() == 1);

  TweetRecord rec;
  rec.tweet_id = "t1";
  EventMention ev{"e1", "trigger", {}};
  auto [trig, cls] = table.lookup(rec, ev);
  CHECK(trig == std::vector<double>{1.0, 0.0});
  CHECK(cls == std::vector<double>{0.0, 1.0});

  CHECK_THROWS_AS(table.insert("t1", "e1", {1.0, 0.0}, {0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(table.insert("t2", "e1", {1.0}, {0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(table.insert("t2", "e1", {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}), ValidationError);

  EventMention missing{"e9", "trigger", {}};
  CHECK_THROWS_AS(table.lookup(rec, missing), ValidationError);
}

TEST_CASE("EmbeddingTable load validates file content") {
  test_util::TempDir dir("stc-features");
  test_util::write_file(dir.file("ok.jsonl"),
                        R"({"tweet_id":"t1","event_id":"e1","v_trigger":[1,0],"v_cls":[0,1]})"
                        "\n\n"
                        R"({"tweet_id":"t1","event_id":"e2","v_trigger":[0.5,0.5],"v_cls":[0,1]})"
                        "\n");
  EmbeddingTable table = EmbeddingTable::load(dir.file("ok.jsonl"));
  CHECK(table.size() == 2);
  CHECK(table.dim() == 2);

  test_util::write_file(dir.file("bad.jsonl"), R"({"tweet_id":"t1","v_trigger":[1],"v_cls":[1]})"
                                               "\n");
  CHECK_THROWS_AS(EmbeddingTable::load(dir.file("bad.jsonl")), ValidationError);
  CHECK_THROWS_AS(EmbeddingTable::load(dir.file("absent.jsonl")), ValidationError);

  test_util::write_file(dir.file("nonnum.jsonl"),
                        R"({"tweet_id":"t1","event_id":"e1","v_trigger":["x"],"v_cls":[1]})"
                        "\n");
  CHECK_THROWS_AS(EmbeddingTable::load(dir.file("nonnum.jsonl")), ValidationError);
}

TEST_CASE("build_features fuses all three blocks per event") {
  TweetRecord rec;
  rec.tweet_id = "t1";
  rec.tweet_text = "storm hits the coast";
  rec.date_numeric = 1503748800;
  rec.date_str = "d";
  rec.location_mentions = 2;
  rec.events = {{"e1", "storm", {}}, {"e2", "hits", {}}};

  HashEmbedder embedder(16, 99);
  FeatureTable table = build_features({rec}, embedder, {0.7, 5});
  CHECK(table.semantic_dim == 16);
  CHECK(table.dim() == 16 + kTemporalDim + kSpatialDim);
  REQUIRE(table.by_event.size() == 2);

  const auto& fused = table.by_event.at(event_key("t1", "e1"));
  REQUIRE(static_cast<int>(fused.size()) == table.dim());

  auto expected_sem = combine_trigger_cls(hash_embed("storm", 16, 99, 1),
                                          hash_embed(rec.tweet_text, 16, 99, 2), 0.7);
  for (int i = 0; i < 16; ++i) CHECK(fused[i] == expected_sem[i]);

  auto expected_tem = encode_temporal(rec.date_numeric);
  for (int i = 0; i < kTemporalDim; ++i) CHECK(fused[16 + i] == expected_tem[i]);

  auto expected_spa = encode_spatial(rec, 5);
  for (int i = 0; i < kSpatialDim; ++i) CHECK(fused[16 + kTemporalDim + i] == expected_spa[i]);
}
