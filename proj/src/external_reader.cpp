#include "dstrc/external_reader.hpp"

#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <optional>

#include <spdlog/spdlog.h>

#include "dstrc/error.hpp"

extern char** environ;

namespace dstrc {

using nlohmann::json;
using nlohmann::ordered_json;

struct ExternalReader::Pending {
  std::mutex mutex;
  std::condition_variable ready;
  std::optional<json> response;
  std::optional<std::string> failure;
};

namespace {

std::string dump_line(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

ordered_json request_base(const std::string& id, std::string_view type, const ReaderQuery& q) {
  ordered_json j;
  j["id"] = id;
  j["type"] = type;
  j["question"] = q.question;
  j["tokens"] = q.context ? q.context->token_texts() : std::vector<std::string>{};
  return j;
}

std::vector<double> logits_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw Error(ErrorCode::kReaderFailure, std::string("response lacks '") + key + "'");
  }
  std::vector<double> out;
  out.reserve(j[key].size());
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw Error(ErrorCode::kReaderFailure, std::string("non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

int connect_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorCode::kConnectFailure, host + ":" + port + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* p = res; p; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(ErrorCode::kConnectFailure, host + ":" + port + ": " + std::strerror(errno));
  return fd;
}

}  // namespace

std::string encode_span_request(const std::string& id, const ReaderQuery& query) {
  return dump_line(request_base(id, "span", query));
}

std::string encode_choice_request(const std::string& id, const ReaderQuery& query) {
  ordered_json j = request_base(id, "choice", query);
  j["options"] = query.options;
  return dump_line(j);
}

ExternalReader::ExternalReader(ExternalReaderOptions options)
    : options_(std::move(options)), slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options_.max_inflight))) {
  ::signal(SIGPIPE, SIG_IGN);
  const std::string& ep = options_.endpoint;
  if (ep.rfind("exec:", 0) == 0) {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      throw Error(ErrorCode::kConnectFailure, "pipe: " + std::string(std::strerror(errno)));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, to_child[1]);
    posix_spawn_file_actions_addclose(&actions, from_child[0]);
    const std::string command = ep.substr(5);
    const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
    pid_t pid = -1;
    const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(to_child[0]);
    ::close(from_child[1]);
    if (rc != 0) {
      ::close(to_child[1]);
      ::close(from_child[0]);
      throw Error(ErrorCode::kConnectFailure, "spawn '" + command + "': " + std::strerror(rc));
    }
    child_pid_ = pid;
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
  } else {
    std::string addr = ep.rfind("tcp:", 0) == 0 ? ep.substr(4) : ep;
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size()) {
      throw Error(ErrorCode::kConnectFailure, "endpoint must be exec:<cmd> or tcp:<host>:<port>, got '" + ep + "'");
    }
    read_fd_ = write_fd_ = connect_tcp(addr.substr(0, colon), addr.substr(colon + 1));
    is_socket_ = true;
  }
  reader_thread_ = std::jthread([this](std::stop_token st) { read_loop(st); });
}

ExternalReader::~ExternalReader() {
  {
    std::lock_guard lock(write_mutex_);
    write_line(std::string(kShutdownMessage));
    if (is_socket_) {
      ::shutdown(write_fd_, SHUT_WR);
    } else {
      ::close(write_fd_);
    }
  }
  reader_thread_.request_stop();
  if (reader_thread_.joinable()) reader_thread_.join();
  ::close(read_fd_);
  if (child_pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 200; ++i) {
      if (::waitpid(child_pid_, &status, WNOHANG) != 0) return;
      ::usleep(10000);
    }
    ::kill(child_pid_, SIGKILL);
    ::waitpid(child_pid_, &status, 0);
  }
}

bool ExternalReader::write_line(const std::string& line) {
  std::string buf = line;
  buf.push_back('\n');
  std::size_t off = 0;
  while (off < buf.size()) {
    const ssize_t n = is_socket_ ? ::send(write_fd_, buf.data() + off, buf.size() - off, MSG_NOSIGNAL)
                                 : ::write(write_fd_, buf.data() + off, buf.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

void ExternalReader::read_loop(std::stop_token stop) {
  std::string buffer;
  char chunk[65536];
  while (!stop.stop_requested()) {
    pollfd pfd{read_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 50);
    if (rc < 0 && errno != EINTR) break;
    if (rc <= 0) continue;
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      dispatch(buffer.substr(start, nl - start));
    }
    buffer.erase(0, start);
  }
  fail_all("reader connection closed");
}

void ExternalReader::dispatch(const std::string& line) {
  if (line.find_first_not_of(" \t\r") == std::string::npos) return;
  json msg = json::parse(line, nullptr, false);
  if (msg.is_discarded() || !msg.is_object() || !msg.contains("id") || !msg["id"].is_string()) {
    spdlog::warn("external reader: dropping unparseable line ({} bytes)", line.size());
    return;
  }
  std::shared_ptr<Pending> target;
  {
    std::lock_guard lock(pending_mutex_);
    auto it = pending_.find(msg["id"].get<std::string>());
    if (it == pending_.end()) {
      spdlog::debug("external reader: response for unknown id {}", msg["id"].get<std::string>());
      return;
    }
    target = it->second;
    pending_.erase(it);
  }
  std::lock_guard lock(target->mutex);
  target->response = std::move(msg);
  target->ready.notify_all();
}

void ExternalReader::fail_all(const std::string& reason) {
  std::map<std::string, std::shared_ptr<Pending>> orphans;
  {
    std::lock_guard lock(pending_mutex_);
    closed_ = true;
    close_reason_ = reason;
    orphans.swap(pending_);
  }
  for (auto& [id, p] : orphans) {
    std::lock_guard lock(p->mutex);
    p->failure = reason;
    p->ready.notify_all();
  }
}

json ExternalReader::roundtrip(const std::string& id, const std::string& line) {
  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  if (!slots_.try_acquire_until(deadline)) {
    throw Error(ErrorCode::kReaderFailure, id + ": timed out waiting for an in-flight slot");
  }
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots_};

  auto pending = std::make_shared<Pending>();
  {
    std::lock_guard lock(pending_mutex_);
    if (closed_) throw Error(ErrorCode::kReaderFailure, id + ": " + close_reason_);
    pending_.emplace(id, pending);
  }
  bool written;
  {
    std::lock_guard lock(write_mutex_);
    written = write_line(line);
  }
  if (!written) {
    std::lock_guard lock(pending_mutex_);
    pending_.erase(id);
    throw Error(ErrorCode::kReaderFailure, id + ": write failed: " + std::strerror(errno));
  }

  std::unique_lock lock(pending->mutex);
  if (!pending->ready.wait_until(lock, deadline, [&] { return pending->response || pending->failure; })) {
    lock.unlock();
    std::lock_guard plock(pending_mutex_);
    pending_.erase(id);
    throw Error(ErrorCode::kReaderFailure, id + ": no response within " +
                                               std::to_string(options_.timeout.count()) + " ms");
  }
  if (pending->failure) throw Error(ErrorCode::kReaderFailure, id + ": " + *pending->failure);
  json response = std::move(*pending->response);
  if (response.contains("error")) {
    throw Error(ErrorCode::kReaderFailure, id + ": reader error: " + response["error"].dump());
  }
  return response;
}

SpanScores ExternalReader::span(const ReaderQuery& query) {
  std::string id;
  {
    std::lock_guard lock(pending_mutex_);
    id = query.id + "#" + std::to_string(sequence_++);
  }
  const json response = roundtrip(id, encode_span_request(id, query));
  SpanScores s;
  s.start_logits = logits_field(response, "start_logits");
  s.end_logits = logits_field(response, "end_logits");
  return s;
}

ChoiceScores ExternalReader::choice(const ReaderQuery& query) {
  std::string id;
  {
    std::lock_guard lock(pending_mutex_);
    id = query.id + "#" + std::to_string(sequence_++);
  }
  const json response = roundtrip(id, encode_choice_request(id, query));
  ChoiceScores s;
  s.option_logits = logits_field(response, "option_logits");
  return s;
}

}  // namespace dstrc
