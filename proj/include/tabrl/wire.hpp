#pragma once

// Newline-delimited JSON protocol spoken with the model bridge.
//
// Request:  {"id": 7, "op": "fit", "payload": {"x": [[...], ...], "y": [...]}}
//           {"id": 8, "op": "predict", "payload": {"x": [[...], ...]}}
//           {"id": 9, "op": "embed", "payload": {"x": [[...]], "layer": "final"}}
//           {"id": 1, "op": "ping", "payload": {}}
//           {"id": 2, "op": "shutdown", "payload": {}}
// Reply:    {"id": 7, "ok": true, "result": ...}
//           {"id": 7, "ok": false, "error": "no context"}
//
// One JSON document per line. Numbers are written with round-trip precision.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tabrl/common.hpp"

namespace tabrl::wire {

enum class Op { Fit, Predict, Embed, Ping, Shutdown };

std::string_view op_name(Op op);
std::optional<Op> parse_op(std::string_view name);

struct Request {
  std::int64_t id = 0;
  Op op = Op::Ping;
  Matrix x;                   // fit, predict, embed
  std::vector<double> y;      // fit
  std::string layer;          // embed

  bool operator==(const Request&) const = default;
};

struct Reply {
  std::int64_t id = 0;
  bool ok = true;
  nlohmann::json result;  // ok == true
  std::string error;      // ok == false

  bool operator==(const Reply&) const = default;
};

/// Protocol violation in a received line.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Serialized without the trailing newline.
std::string encode(const Request& request);
std::string encode(const Reply& reply);

Request decode_request(std::string_view line);
Reply decode_reply(std::string_view line);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
std::vector<double> vector_from_json(const nlohmann::json& j);

}  // namespace tabrl::wire
