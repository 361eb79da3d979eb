#include "stcausal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace stc {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

const json& require_field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) fail(std::string(name) + ": required field missing");
  return *it;
}

std::string get_string(const json& j, const char* name) {
  const json& f = require_field(j, name);
  if (!f.is_string()) fail(std::string(name) + ": expected a string");
  return f.get<std::string>();
}

std::vector<std::string> get_string_array(const json& j, const char* name) {
  const json& f = require_field(j, name);
  if (!f.is_array()) fail(std::string(name) + ": expected an array");
  std::vector<std::string> out;
  out.reserve(f.size());
  for (const auto& e : f) {
    if (!e.is_string()) fail(std::string(name) + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void check_lat_lon(const LatLon& p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0))
    fail("bounding_box: latitude " + format_double(p.lat) + " out of range [-90,90]");
  if (!(p.lon >= -180.0 && p.lon <= 180.0))
    fail("bounding_box: longitude " + format_double(p.lon) + " out of range [-180,180]");
}

}  // namespace

BoundingBox parse_bounding_box(const std::string& text) {
  const char* p = text.c_str();
  const char* end = p + text.size();
  auto skip_ws = [&] {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (p >= end || *p != c)
      fail(std::string("bounding_box: expected '") + c + "' at position " +
           std::to_string(p - text.c_str()) + " of \"" + text + "\"");
    ++p;
  };
  auto read_number = [&]() -> double {
    skip_ws();
    char* after = nullptr;
    double v = std::strtod(p, &after);
    if (after == p) fail("bounding_box: expected a number in \"" + text + "\"");
    p = after;
    return v;
  };

  std::vector<LatLon> corners;
  while (true) {
    expect('(');
    LatLon c;
    c.lat = read_number();
    expect(',');
    c.lon = read_number();
    expect(')');
    check_lat_lon(c);
    corners.push_back(c);
    skip_ws();
    if (p >= end) break;
    expect(',');
  }
  if (corners.size() != 4)
    fail("bounding_box: expected 4 corners, got " + std::to_string(corners.size()));
  BoundingBox box;
  std::copy(corners.begin(), corners.end(), box.corners.begin());
  return box;
}

std::string format_bounding_box(const BoundingBox& box) {
  std::string out;
  for (size_t i = 0; i < box.corners.size(); ++i) {
    if (i) out += ',';
    out += '(' + format_double(box.corners[i].lat) + ',' + format_double(box.corners[i].lon) + ')';
  }
  return out;
}

LatLon bbox_centroid(const BoundingBox& box) {
  LatLon c;
  for (const auto& p : box.corners) {
    c.lat += p.lat;
    c.lon += p.lon;
  }
  c.lat /= 4.0;
  c.lon /= 4.0;
  return c;
}

TweetRecord parse_tweet(const std::string& json_line) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::parse_error& e) {
    fail(std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) fail("parse error: expected a JSON object");

  TweetRecord rec;
  rec.tweet_id = get_string(j, "tweet_id");
  rec.tweet_text = get_string(j, "tweet_text");
  rec.tokens = get_string_array(j, "tokens");
  rec.mask = get_string_array(j, "mask");
  rec.date_str = get_string(j, "date_str");

  if (rec.mask.size() != rec.tokens.size())
    fail("mask: length " + std::to_string(rec.mask.size()) + " does not match tokens length " +
         std::to_string(rec.tokens.size()));
  for (const auto& tag : rec.mask) {
    if (tag != "O" && tag != "I-C" && tag != "I-E")
      fail("mask: unknown tag \"" + tag + "\" (expected O, I-C, or I-E)");
  }

  const json& dn = require_field(j, "date_numeric");
  if (!dn.is_number_integer() && !dn.is_number_unsigned())
    fail("date_numeric: expected an integer Unix timestamp");
  rec.date_numeric = dn.get<int64_t>();
  if (rec.date_numeric <= 0) fail("date_numeric: must be positive");

  const json& ev = require_field(j, "events");
  if (!ev.is_array()) fail("events: expected an array");
  std::set<std::string> ids;
  for (const auto& e : ev) {
    if (!e.is_object()) fail("events: expected an array of objects");
    EventMention m;
    m.id = get_string(e, "id");
    m.trigger = get_string(e, "trigger");
    if (m.id.empty()) fail("events.id: must be non-empty");
    if (m.trigger.empty()) fail("events.trigger: must be non-empty");
    if (!ids.insert(m.id).second) fail("events.id: duplicate id \"" + m.id + "\"");
    if (auto it = e.find("arguments"); it != e.end()) {
      if (!it->is_object()) fail("events.arguments: expected an object");
      for (const auto& [k, v] : it->items()) {
        if (!v.is_string()) fail("events.arguments: expected string values");
        m.arguments[k] = v.get<std::string>();
      }
    }
    rec.events.push_back(std::move(m));
  }

  const json& cr = require_field(j, "causal_relation");
  if (!cr.is_object()) fail("causal_relation: expected an object");
  const json& rel = require_field(cr, "relation");
  if (!rel.is_boolean()) fail("causal_relation.relation: expected a boolean");
  rec.causal.relation = rel.get<bool>();
  const json& pairs = require_field(cr, "pairs");
  if (!pairs.is_array()) fail("causal_relation.pairs: expected an array");
  for (const auto& p : pairs) {
    if (!p.is_object()) fail("causal_relation.pairs: expected an array of objects");
    CausalPair cp;
    cp.cause = get_string(p, "CAUSE");
    cp.effect = get_string(p, "EFFECT");
    if (cp.cause == cp.effect)
      fail("causal_relation.pairs: CAUSE and EFFECT are both \"" + cp.cause + "\"");
    if (!ids.count(cp.cause))
      fail("causal_relation.pairs: CAUSE \"" + cp.cause + "\" is not an event id");
    if (!ids.count(cp.effect))
      fail("causal_relation.pairs: EFFECT \"" + cp.effect + "\" is not an event id");
    rec.causal.pairs.push_back(std::move(cp));
  }
  if (rec.causal.relation != !rec.causal.pairs.empty())
    fail("causal_relation: relation flag inconsistent with pairs");

  if (auto it = j.find("geolocation"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) fail("geolocation: expected a string");
    std::string g = it->get<std::string>();
    if (!g.empty()) rec.geolocation = std::move(g);
  }
  if (auto it = j.find("bounding_box"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) fail("bounding_box: expected a string");
    std::string b = it->get<std::string>();
    if (!b.empty()) rec.bounding_box = parse_bounding_box(b);
  }
  if (auto it = j.find("location_mentions"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer() && !it->is_number_unsigned())
      fail("location_mentions: expected an integer");
    int64_t n = it->get<int64_t>();
    if (n < 0) fail("location_mentions: must be non-negative");
    rec.location_mentions = static_cast<int>(n);
  }
  return rec;
}

std::string serialize_tweet(const TweetRecord& rec) {
  ordered_json j;
  j["tweet_text"] = rec.tweet_text;
  j["tokens"] = rec.tokens;
  ordered_json events = ordered_json::array();
  for (const auto& e : rec.events) {
    ordered_json je;
    je["id"] = e.id;
    je["trigger"] = e.trigger;
    je["arguments"] = ordered_json::object();
    for (const auto& [k, v] : e.arguments) je["arguments"][k] = v;
    events.push_back(std::move(je));
  }
  j["events"] = std::move(events);
  ordered_json cr;
  cr["relation"] = rec.causal.relation;
  ordered_json pairs = ordered_json::array();
  for (const auto& p : rec.causal.pairs) {
    ordered_json jp;
    jp["CAUSE"] = p.cause;
    jp["EFFECT"] = p.effect;
    pairs.push_back(std::move(jp));
  }
  cr["pairs"] = std::move(pairs);
  j["causal_relation"] = std::move(cr);
  j["mask"] = rec.mask;
  j["tweet_id"] = rec.tweet_id;
  j["date_str"] = rec.date_str;
  j["date_numeric"] = rec.date_numeric;
  if (rec.geolocation) j["geolocation"] = *rec.geolocation;
  if (rec.bounding_box) j["bounding_box"] = format_bounding_box(*rec.bounding_box);
  if (rec.location_mentions) j["location_mentions"] = *rec.location_mentions;
  return j.dump();
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream out;
  out << "records: " << report.records << "\n";
  out << "errors: " << report.failed << "\n";
  size_t shown = std::min<size_t>(report.errors.size(), 10);
  for (size_t i = 0; i < shown; ++i) out << report.errors[i] << "\n";
  if (report.errors.size() > shown)
    out << "(" << report.errors.size() - shown << " more not shown)\n";
  return out.str();
}

std::vector<TweetRecord> load_dataset(const std::string& path, ValidationReport* report) {
  std::ifstream in(path);
  if (!in) fail("cannot open dataset file: " + path);
  std::vector<TweetRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      records.push_back(parse_tweet(line));
      if (report) ++report->records;
    } catch (const ValidationError& e) {
      std::string msg = "line " + std::to_string(line_no) + ": " + e.what();
      if (!report) fail(msg);
      ++report->failed;
      report->errors.push_back(std::move(msg));
    }
  }
  return records;
}

void write_dataset(const std::string& path, const std::vector<TweetRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& rec : records) out << serialize_tweet(rec) << "\n";
}

void sort_chronologically(std::vector<TweetRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const TweetRecord& a, const TweetRecord& b) {
    if (a.date_numeric != b.date_numeric) return a.date_numeric < b.date_numeric;
    return a.tweet_id < b.tweet_id;
  });
}

DatasetSplit split_dataset(const std::vector<TweetRecord>& records, const SplitRatios& ratios,
                           uint64_t seed) {
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0)
    throw ConfigError("split: ratios must be non-negative");
  double sum = ratios.train + ratios.validation + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("split: ratios sum to " + format_double(sum) + ", expected 1");

  std::vector<size_t> order(records.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  size_t n = records.size();
  size_t n_train = std::min<size_t>(n, static_cast<size_t>(std::llround(ratios.train * n)));
  size_t n_val =
      std::min<size_t>(n - n_train, static_cast<size_t>(std::llround(ratios.validation * n)));

  DatasetSplit split;
  for (size_t k = 0; k < n; ++k) {
    const TweetRecord& rec = records[order[k]];
    if (k < n_train)
      split.train.push_back(rec);
    else if (k < n_train + n_val)
      split.validation.push_back(rec);
    else
      split.test.push_back(rec);
  }
  sort_chronologically(split.train);
  sort_chronologically(split.validation);
  sort_chronologically(split.test);
  return split;
}

}  // namespace stc
