#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynfrs/data.hpp"

namespace dynfrs {

class Forest;

enum class OpKind { kAdd, kDelete, kQuery };

std::string_view op_name(OpKind op);

// One line of a request stream (JSON lines):
//   {"op":"add","features":[...],"label":0|1}
//   {"op":"delete","id":N}
//   {"op":"query","features":[...]}
struct Request {
  OpKind op = OpKind::kQuery;
  std::vector<double> features;
  Label label = 0;
  SampleId id = 0;
};

// Throws ParseError on malformed JSON or a payload that does not fit the op.
Request parse_request(std::string_view line);
std::string to_json(const Request& request);

// Outcome codes match the CLI exit codes: 0 ok, 2 bad request, 3 unknown id.
struct LatencyRecord {
  std::size_t line = 0;
  std::optional<OpKind> op;  // unset when the line did not parse
  double micros = 0.0;
  int code = 0;
  std::string message;
  double prediction = 0.0;  // query result
  SampleId id = 0;          // id assigned by add, or the id deleted

  bool ok() const { return code == 0; }
};

std::string to_jsonl(const LatencyRecord& record);

struct OpSummary {
  std::size_t count = 0;
  std::size_t errors = 0;
  double mean_us = 0.0;
  double min_us = 0.0;
  double max_us = 0.0;
};

struct StreamSummary {
  OpSummary add;
  OpSummary del;
  OpSummary query;
  std::size_t malformed = 0;
};

StreamSummary summarize(const std::vector<LatencyRecord>& records);

// Serves each line in order against the forest, timing only the forest call.
// Bad lines become error records and the stream continues. Each record is
// also written to `log` as it completes, if given.
std::vector<LatencyRecord> replay(Forest& forest, std::istream& in, std::ostream* log = nullptr);

struct StreamSpec {
  std::size_t requests = 1000;
  double modification_share = 0.5;  // split evenly between adds and deletes
  std::uint64_t seed = 0;
};

// Writes a request stream. Each request is independently a modification with
// probability modification_share, else a query; modifications are adds or
// deletes with equal odds. Adds and queries copy a uniformly drawn sample of
// `pool`; deletes target a uniformly drawn id among `live`, which is
// maintained as the stream would change it (adds get ids next_id, next_id+1,
// ...). A delete with nothing live becomes an add.
void generate_stream(const Dataset& pool, std::vector<SampleId> live, SampleId next_id,
                     const StreamSpec& spec, std::ostream& out);

}  // namespace dynfrs
