#include "tabrl/remote.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

namespace tabrl {
namespace {

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size())
    throw InputError("bridge endpoint must look like host:port, got '" + endpoint + "'");
  return {endpoint.substr(0, colon), endpoint.substr(colon + 1)};
}

}  // namespace

BridgeSession::BridgeSession(const std::string& endpoint, double timeout_seconds) {
  const auto [host, port] = split_endpoint(endpoint);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0)
    throw ConnectionError("cannot resolve " + endpoint + ": " + ::gai_strerror(rc));

  std::string last_error = "no usable address";
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(found);
  if (fd_ < 0) throw ConnectionError("cannot connect to bridge at " + endpoint + ": " + last_error);

  if (timeout_seconds > 0) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout_seconds);
    tv.tv_usec = static_cast<suseconds_t>((timeout_seconds - std::floor(timeout_seconds)) * 1e6);
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  }
}

BridgeSession::~BridgeSession() {
  if (fd_ >= 0) ::close(fd_);
}

void BridgeSession::send_line(const std::string& line) {
  std::string framed = line;
  framed.push_back('\n');
  std::size_t sent = 0;
  while (sent < framed.size()) {
    const ssize_t n = ::send(fd_, framed.data() + sent, framed.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(std::string("bridge send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string BridgeSession::read_line() {
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[65536];
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n == 0) throw ConnectionError("bridge closed the connection");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(std::string("bridge receive failed: ") + std::strerror(errno));
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

wire::Reply BridgeSession::call(wire::Request request) {
  std::lock_guard lock(mutex_);
  request.id = next_id_++;
  send_line(wire::encode(request));
  wire::Reply reply;
  try {
    reply = wire::decode_reply(read_line());
  } catch (const wire::ProtocolError& e) {
    throw ConnectionError(std::string("malformed bridge reply: ") + e.what());
  }
  if (reply.id != request.id)
    throw ConnectionError("bridge reply id " + std::to_string(reply.id) +
                          " does not match request " + std::to_string(request.id));
  return reply;
}

nlohmann::json BridgeSession::checked_call(wire::Request request) {
  const std::string op(wire::op_name(request.op));
  wire::Reply reply = call(std::move(request));
  if (reply.ok) return std::move(reply.result);
  if (reply.error.find("unsupported") != std::string::npos ||
      reply.error.find("not supported") != std::string::npos)
    throw CapabilityError("bridge cannot " + op + ": " + reply.error);
  throw std::runtime_error("bridge " + op + " failed: " + reply.error);
}

RemoteRegressor::RemoteRegressor(const BackendConfig& config, const QDataset& context)
    : config_(config), context_(context), width_(context.width()) {
  validate_dataset(context);
  session_ = std::make_shared<BridgeSession>(config.endpoint, config.timeout_seconds);
  wire::Request fit_request;
  fit_request.op = wire::Op::Fit;
  fit_request.x = context.x;
  fit_request.y = context.y;
  session_->checked_call(std::move(fit_request));
}

std::vector<double> RemoteRegressor::predict(const Matrix& queries) const {
  if (queries.empty()) return {};
  if (queries.cols() != width_) throw InputError("query width does not match context width");
  wire::Request request;
  request.op = wire::Op::Predict;
  request.x = queries;
  std::vector<double> out;
  try {
    out = wire::vector_from_json(session_->checked_call(std::move(request)));
  } catch (const wire::ProtocolError& e) {
    throw ConnectionError(std::string("bad predict result: ") + e.what());
  }
  if (out.size() != queries.rows())
    throw ConnectionError("bridge returned " + std::to_string(out.size()) +
                          " predictions for " + std::to_string(queries.rows()) + " rows");
  return out;
}

Matrix RemoteRegressor::embed(const Matrix& rows) const {
  if (rows.empty()) return {};
  if (rows.cols() != width_) throw InputError("row width does not match context width");
  wire::Request request;
  request.op = wire::Op::Embed;
  request.x = rows;
  request.layer = config_.embed_layer;
  Matrix out;
  try {
    out = wire::matrix_from_json(session_->checked_call(std::move(request)));
  } catch (const wire::ProtocolError& e) {
    throw ConnectionError(std::string("bad embed result: ") + e.what());
  }
  if (out.rows() != rows.rows())
    throw ConnectionError("bridge returned the wrong number of embeddings");
  return out;
}

RegressorHandle RemoteRegressor::with_targets(std::vector<double> targets) const {
  QDataset next{context_.x, std::move(targets)};
  return std::make_shared<const RemoteRegressor>(config_, next);
}

}  // namespace tabrl
