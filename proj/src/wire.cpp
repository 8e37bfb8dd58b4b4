#include "tabrl/wire.hpp"

#include <cmath>

namespace tabrl::wire {

using nlohmann::json;

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Fit:
      return "fit";
    case Op::Predict:
      return "predict";
    case Op::Embed:
      return "embed";
    case Op::Ping:
      return "ping";
    case Op::Shutdown:
      return "shutdown";
  }
  return "";
}

std::optional<Op> parse_op(std::string_view name) {
  for (Op op : {Op::Fit, Op::Predict, Op::Embed, Op::Ping, Op::Shutdown})
    if (op_name(op) == name) return op;
  return std::nullopt;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(json(std::vector<double>(r.begin(), r.end())));
  }
  return rows;
}

std::vector<double> vector_from_json(const json& j) {
  if (!j.is_array()) throw ProtocolError("expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ProtocolError("expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ProtocolError("non-finite number");
    out.push_back(d);
  }
  return out;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw ProtocolError("expected an array of rows");
  Matrix m;
  for (const auto& row : j) {
    const auto values = vector_from_json(row);
    if (!m.empty() && values.size() != m.cols())
      throw ProtocolError("rows have inconsistent widths");
    m.append_row(values);
  }
  return m;
}

std::string encode(const Request& request) {
  json payload = json::object();
  switch (request.op) {
    case Op::Fit:
      payload["x"] = matrix_to_json(request.x);
      payload["y"] = request.y;
      break;
    case Op::Embed:
      payload["layer"] = request.layer;
      [[fallthrough]];
    case Op::Predict:
      payload["x"] = matrix_to_json(request.x);
      break;
    case Op::Ping:
    case Op::Shutdown:
      break;
  }
  json doc = {{"id", request.id}, {"op", op_name(request.op)}, {"payload", payload}};
  return doc.dump();
}

std::string encode(const Reply& reply) {
  json doc = {{"id", reply.id}, {"ok", reply.ok}};
  if (reply.ok)
    doc["result"] = reply.result;
  else
    doc["error"] = reply.error;
  return doc.dump();
}

namespace {

json parse_object(std::string_view line) {
  json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ProtocolError("malformed JSON");
  if (!doc.is_object()) throw ProtocolError("message is not a JSON object");
  if (!doc.contains("id") || !doc["id"].is_number_integer())
    throw ProtocolError("missing integer 'id'");
  return doc;
}

}  // namespace

Request decode_request(std::string_view line) {
  const json doc = parse_object(line);
  Request r;
  r.id = doc["id"].get<std::int64_t>();
  if (!doc.contains("op") || !doc["op"].is_string()) throw ProtocolError("missing 'op'");
  const auto op = parse_op(doc["op"].get<std::string>());
  if (!op) throw ProtocolError("unknown op '" + doc["op"].get<std::string>() + "'");
  r.op = *op;
  const json payload = doc.value("payload", json::object());
  if (!payload.is_object()) throw ProtocolError("'payload' must be an object");
  switch (r.op) {
    case Op::Fit:
      if (!payload.contains("x") || !payload.contains("y"))
        throw ProtocolError("fit needs 'x' and 'y'");
      r.x = matrix_from_json(payload["x"]);
      r.y = vector_from_json(payload["y"]);
      if (r.y.size() != r.x.rows()) throw ProtocolError("'x' and 'y' lengths differ");
      break;
    case Op::Embed:
      if (payload.contains("layer")) {
        if (!payload["layer"].is_string()) throw ProtocolError("'layer' must be a string");
        r.layer = payload["layer"].get<std::string>();
      }
      [[fallthrough]];
    case Op::Predict:
      if (!payload.contains("x")) throw ProtocolError("missing 'x'");
      r.x = matrix_from_json(payload["x"]);
      break;
    case Op::Ping:
    case Op::Shutdown:
      break;
  }
  return r;
}

Reply decode_reply(std::string_view line) {
  const json doc = parse_object(line);
  Reply r;
  r.id = doc["id"].get<std::int64_t>();
  if (!doc.contains("ok") || !doc["ok"].is_boolean()) throw ProtocolError("missing 'ok'");
  r.ok = doc["ok"].get<bool>();
  if (r.ok) {
    r.result = doc.value("result", json());
  } else {
    const json err = doc.value("error", json("unspecified error"));
    r.error = err.is_string() ? err.get<std::string>() : err.dump();
  }
  return r;
}

}  // namespace tabrl::wire
