#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "dstrc/readers.hpp"

namespace dstrc {

struct ExternalReaderOptions {
  /// "exec:<shell command>" runs a child process and talks over its
  /// stdin/stdout; "tcp:<host>:<port>" (or bare "<host>:<port>") connects.
  std::string endpoint;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_inflight = 16;
};

/// Request line for a query, exactly as written to the transport (no newline).
std::string encode_span_request(const std::string& id, const ReaderQuery& query);
std::string encode_choice_request(const std::string& id, const ReaderQuery& query);
inline constexpr std::string_view kShutdownMessage = R"({"type":"shutdown"})";

/// Client for an out-of-process reader speaking newline-delimited JSON.
/// Requests are pipelined (up to max_inflight) and matched to responses by
/// id; a missing, late, malformed or {"id","error"} response fails only its
/// own request with kReaderFailure.
class ExternalReader final : public Reader {
 public:
  /// Throws kConnectFailure.
  explicit ExternalReader(ExternalReaderOptions options);
  ~ExternalReader() override;

  ExternalReader(const ExternalReader&) = delete;
  ExternalReader& operator=(const ExternalReader&) = delete;

  std::string name() const override { return "external:" + options_.endpoint; }
  SpanScores span(const ReaderQuery& query) override;
  ChoiceScores choice(const ReaderQuery& query) override;

 private:
  struct Pending;

  nlohmann::json roundtrip(const std::string& id, const std::string& line);
  void read_loop(std::stop_token stop);
  void dispatch(const std::string& line);
  void fail_all(const std::string& reason);
  bool write_line(const std::string& line);

  ExternalReaderOptions options_;
  int read_fd_ = -1;
  int write_fd_ = -1;
  bool is_socket_ = false;
  int child_pid_ = -1;

  std::counting_semaphore<> slots_;
  std::mutex write_mutex_;
  std::mutex pending_mutex_;
  std::map<std::string, std::shared_ptr<Pending>> pending_;
  bool closed_ = false;
  std::string close_reason_;
  std::uint64_t sequence_ = 0;

  std::jthread reader_thread_;
};

}  // namespace dstrc
