#include "dynfrs/stream.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>

#include "dynfrs/errors.hpp"
#include "dynfrs/forest.hpp"
#include "dynfrs/rng.hpp"
#include "json.hpp"

namespace dynfrs {

using nlohmann::json;

std::string_view op_name(OpKind op) {
  switch (op) {
    case OpKind::kAdd:
      return "add";
    case OpKind::kDelete:
      return "delete";
    case OpKind::kQuery:
      return "query";
  }
  return "?";
}

namespace {

std::vector<double> parse_features(const json& j) {
  const auto it = j.find("features");
  if (it == j.end() || !it->is_array()) throw ParseError("request needs a \"features\" array");
  std::vector<double> x;
  x.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw ParseError("features must be numbers");
    x.push_back(v.get<double>());
    if (!std::isfinite(x.back())) throw ParseError("features must be finite");
  }
  return x;
}

}  // namespace

Request parse_request(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bad JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) {
    throw ParseError("request needs a string \"op\"");
  }
  const auto op = j["op"].get<std::string>();
  Request r;
  if (op == "add") {
    r.op = OpKind::kAdd;
    r.features = parse_features(j);
    const auto it = j.find("label");
    if (it == j.end() || !it->is_number_integer() || (it->get<int>() != 0 && it->get<int>() != 1)) {
      throw ParseError("add needs \"label\" 0 or 1");
    }
    r.label = static_cast<Label>(it->get<int>());
  } else if (op == "delete") {
    r.op = OpKind::kDelete;
    const auto it = j.find("id");
    if (it == j.end() || !it->is_number_unsigned()) throw ParseError("delete needs a non-negative \"id\"");
    const auto id = it->get<std::uint64_t>();
    if (id > std::numeric_limits<SampleId>::max()) throw ParseError("id out of range");
    r.id = static_cast<SampleId>(id);
  } else if (op == "query") {
    r.op = OpKind::kQuery;
    r.features = parse_features(j);
  } else {
    throw ParseError("unknown op \"" + op + "\"");
  }
  return r;
}

std::string to_json(const Request& r) {
  json j;
  j["op"] = op_name(r.op);
  if (r.op == OpKind::kDelete) {
    j["id"] = r.id;
  } else {
    j["features"] = r.features;
    if (r.op == OpKind::kAdd) j["label"] = r.label;
  }
  return j.dump();
}

std::string to_jsonl(const LatencyRecord& r) {
  json j;
  j["line"] = r.line;
  j["op"] = r.op ? json(op_name(*r.op)) : json(nullptr);
  j["us"] = r.micros;
  j["code"] = r.code;
  if (!r.ok()) j["error"] = r.message;
  if (r.ok() && r.op == OpKind::kQuery) j["p"] = r.prediction;
  if (r.ok() && (r.op == OpKind::kAdd || r.op == OpKind::kDelete)) j["id"] = r.id;
  return j.dump();
}

StreamSummary summarize(const std::vector<LatencyRecord>& records) {
  StreamSummary s;
  for (const auto& r : records) {
    if (!r.op) {
      ++s.malformed;
      continue;
    }
    OpSummary& o = *r.op == OpKind::kAdd ? s.add : *r.op == OpKind::kDelete ? s.del : s.query;
    if (!r.ok()) {
      ++o.errors;
      continue;
    }
    o.min_us = o.count == 0 ? r.micros : std::min(o.min_us, r.micros);
    o.max_us = o.count == 0 ? r.micros : std::max(o.max_us, r.micros);
    o.mean_us += r.micros;
    ++o.count;
  }
  for (auto* o : {&s.add, &s.del, &s.query}) {
    if (o->count) o->mean_us /= static_cast<double>(o->count);
  }
  return s;
}

std::vector<LatencyRecord> replay(Forest& forest, std::istream& in, std::ostream* log) {
  using Clock = std::chrono::steady_clock;
  std::vector<LatencyRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    LatencyRecord rec;
    rec.line = line_no;
    try {
      const auto req = parse_request(line);
      rec.op = req.op;
      const auto start = Clock::now();
      try {
        switch (req.op) {
          case OpKind::kAdd:
            rec.id = forest.add(req.features, req.label);
            break;
          case OpKind::kDelete:
            forest.remove(req.id);
            rec.id = req.id;
            break;
          case OpKind::kQuery:
            rec.prediction = forest.predict(req.features);
            break;
        }
      } catch (...) {
        rec.micros = std::chrono::duration<double, std::micro>(Clock::now() - start).count();
        throw;
      }
      rec.micros = std::chrono::duration<double, std::micro>(Clock::now() - start).count();
    } catch (const NotFoundError& e) {
      rec.code = 3;
      rec.message = e.what();
    } catch (const Error& e) {
      rec.code = 2;
      rec.message = e.what();
    }
    if (log) *log << to_jsonl(rec) << '\n';
    records.push_back(std::move(rec));
  }
  return records;
}

void generate_stream(const Dataset& pool, std::vector<SampleId> live, SampleId next_id,
                     const StreamSpec& spec, std::ostream& out) {
  if (pool.size() == 0) throw ArgumentError("stream generator needs a non-empty sample pool");
  if (!(spec.modification_share >= 0.0 && spec.modification_share <= 1.0)) {
    throw ArgumentError("modification share must lie in [0, 1]");
  }
  const auto pool_ids = pool.live_ids();
  Rng rng(mix_seed(spec.seed, 0x57a3));
  for (std::size_t i = 0; i < spec.requests; ++i) {
    Request r;
    if (uniform01(rng) < spec.modification_share) {
      r.op = uniform01(rng) < 0.5 ? OpKind::kAdd : OpKind::kDelete;
      if (r.op == OpKind::kDelete && live.empty()) r.op = OpKind::kAdd;
    } else {
      r.op = OpKind::kQuery;
    }
    if (r.op == OpKind::kDelete) {
      const auto at = uniform_below(rng, live.size());
      r.id = live[at];
      live[at] = live.back();
      live.pop_back();
    } else {
      const auto src = pool_ids[uniform_below(rng, pool_ids.size())];
      r.features = pool.features(src);
      if (r.op == OpKind::kAdd) {
        r.label = pool.label(src);
        live.push_back(next_id++);
      }
    }
    out << to_json(r) << '\n';
  }
}

}  // namespace dynfrs
