#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "tabrl/regressor.hpp"
#include "tabrl/wire.hpp"

namespace tabrl {

/// One TCP connection to the model bridge. The bridge keeps one context per
/// connection. Requests are serialized: one in flight at a time.
class BridgeSession {
 public:
  /// `endpoint` is "host:port". Throws ConnectionError when unreachable.
  BridgeSession(const std::string& endpoint, double timeout_seconds);
  ~BridgeSession();
  BridgeSession(const BridgeSession&) = delete;
  BridgeSession& operator=(const BridgeSession&) = delete;

  /// Sends one request, waits for its reply. Transport failures and id
  /// mismatches throw ConnectionError; error replies are returned as-is.
  wire::Reply call(wire::Request request);

  /// Like call() but turns an error reply into an exception. Replies mentioning
  /// an unsupported operation raise CapabilityError, anything else
  /// std::runtime_error.
  nlohmann::json checked_call(wire::Request request);

 private:
  void send_line(const std::string& line);
  std::string read_line();

  int fd_ = -1;
  std::string buffer_;
  std::int64_t next_id_ = 1;
  std::mutex mutex_;
};

/// Bridge-backed handle: the context lives in a dedicated session.
class RemoteRegressor final : public FittedRegressor {
 public:
  RemoteRegressor(const BackendConfig& config, const QDataset& context);

  BackendKind backend() const override { return BackendKind::Remote; }
  std::size_t width() const override { return width_; }
  std::size_t context_size() const override { return context_.size(); }

  std::vector<double> predict(const Matrix& queries) const override;
  Matrix embed(const Matrix& rows) const override;
  RegressorHandle with_targets(std::vector<double> targets) const override;

 private:
  BackendConfig config_;
  QDataset context_;
  std::size_t width_;
  std::shared_ptr<BridgeSession> session_;
};

}  // namespace tabrl
