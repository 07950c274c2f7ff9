#include "genolm/bridge.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "genolm/error.hpp"

namespace genolm {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

Error violation(const std::string& detail) { return Error(ErrorCode::ProtocolViolation, detail); }

int connect_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorCode::PeerUnavailable, host + ":" + port + ": " + ::gai_strerror(rc));
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
  if (fd < 0) throw Error(ErrorCode::PeerUnavailable, host + ":" + port + ": " + std::strerror(errno));
  return fd;
}

}  // namespace

std::unique_ptr<BridgeModel> BridgeModel::connect(const std::string& endpoint, BridgeOptions options) {
  ignore_sigpipe();
  std::unique_ptr<BridgeModel> model;
  if (endpoint.rfind("tcp:", 0) == 0) {
    const std::string rest = endpoint.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "expected tcp:HOST:PORT");
    const int fd = connect_tcp(rest.substr(0, colon), rest.substr(colon + 1));
    const int wfd = ::dup(fd);
    model.reset(new BridgeModel(fd, wfd, -1, options));
  } else {
    const std::string command = endpoint.rfind("exec:", 0) == 0 ? endpoint.substr(5) : endpoint;
    if (command.empty()) throw Error(ErrorCode::InvalidArgument, "empty bridge command");
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0) throw Error(ErrorCode::PeerUnavailable, std::strerror(errno));
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw Error(ErrorCode::PeerUnavailable, std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw Error(ErrorCode::PeerUnavailable, std::strerror(errno));
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
    model.reset(new BridgeModel(from_child[0], to_child[1], pid, options));
  }

  const auto reply = model->roundtrip({{"op", "vocab"}});
  if (!reply.contains("tokens") || !reply["tokens"].is_array()) throw violation("vocab reply lacks \"tokens\"");
  try {
    model->vocab_ = Vocabulary::from_tokens(reply["tokens"].get<std::vector<std::string>>());
  } catch (const std::exception& e) {
    throw violation(std::string("vocab reply: ") + e.what());
  }
  return model;
}

BridgeModel::BridgeModel(int read_fd, int write_fd, int pid, BridgeOptions options)
    : read_fd_(read_fd), write_fd_(write_fd), pid_(pid), options_(options) {}

BridgeModel::~BridgeModel() {
  if (write_fd_ >= 0) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  if (pid_ > 0) {
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) != 0) return;
      ::usleep(10000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
}

nlohmann::json BridgeModel::roundtrip(const nlohmann::json& request) const {
  std::lock_guard lock(mutex_);
  if (broken_) throw Error(ErrorCode::PeerUnavailable, "connection unusable after an earlier failure");
  const std::string line = request.dump() + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = ::write(write_fd_, line.data() + sent, line.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw Error(ErrorCode::PeerUnavailable, std::string("write: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }

  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string reply_line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      try {
        return nlohmann::json::parse(reply_line);
      } catch (const nlohmann::json::exception& e) {
        broken_ = true;
        throw violation(std::string("unparseable reply: ") + e.what());
      }
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      broken_ = true;
      throw Error(ErrorCode::Timeout, "no reply within " + std::to_string(options_.timeout.count()) + " ms");
    }
    pollfd pfd{read_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw Error(ErrorCode::PeerUnavailable, std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) continue;
    char chunk[65536];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw Error(ErrorCode::PeerUnavailable, std::string("read: ") + std::strerror(errno));
    }
    if (n == 0) {
      broken_ = true;
      throw Error(ErrorCode::PeerUnavailable, "peer closed the connection");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

TokenDistribution parse_next_reply(const nlohmann::json& reply, std::size_t vocab_size, double mass_tolerance) {
  if (!reply.is_object()) throw violation("reply is not an object");
  if (reply.contains("error")) throw violation("peer error: " + reply["error"].dump());
  std::vector<double> probs;
  if (reply.contains("probs")) {
    const auto& arr = reply["probs"];
    if (!arr.is_array()) throw violation("\"probs\" is not an array");
    if (arr.size() != vocab_size) {
      throw violation("\"probs\" has length " + std::to_string(arr.size()) + ", vocabulary has " +
                      std::to_string(vocab_size));
    }
    probs.reserve(vocab_size);
    for (const auto& x : arr) {
      if (!x.is_number()) throw violation("non-numeric probability");
      probs.push_back(x.get<double>());
    }
  } else if (reply.contains("top")) {
    const auto& arr = reply["top"];
    if (!arr.is_array()) throw violation("\"top\" is not an array");
    const auto rest_it = reply.find("rest_mass");
    const double rest = rest_it == reply.end() ? 0.0 : (rest_it->is_number() ? rest_it->get<double>() : -1.0);
    if (!std::isfinite(rest) || rest < 0.0) throw violation("bad \"rest_mass\"");
    probs.assign(vocab_size, -1.0);
    std::size_t listed = 0;
    for (const auto& entry : arr) {
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() || !entry[1].is_number()) {
        throw violation("\"top\" entries must be [id, logprob]");
      }
      const auto id = entry[0].get<long long>();
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) throw violation("token id " + std::to_string(id) + " out of range");
      if (probs[static_cast<std::size_t>(id)] >= 0.0) throw violation("token id " + std::to_string(id) + " repeated");
      probs[static_cast<std::size_t>(id)] = std::exp(entry[1].get<double>());
      ++listed;
    }
    const std::size_t unlisted = vocab_size - listed;
    if (unlisted == 0 && rest > mass_tolerance) throw violation("rest_mass with every token listed");
    const double share = unlisted ? rest / static_cast<double>(unlisted) : 0.0;
    for (auto& p : probs) {
      if (p < 0.0) p = share;
    }
  } else {
    throw violation("reply has neither \"probs\" nor \"top\"");
  }

  double sum = 0.0;
  for (const double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw violation("negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > mass_tolerance) throw violation("probabilities sum to " + std::to_string(sum));
  for (auto& p : probs) p /= sum;
  return TokenDistribution::from_probs(std::move(probs));
}

TokenDistribution BridgeModel::next_distribution(std::span<const TokenId> context) const {
  for (const TokenId t : context) {
    if (t >= vocab_.size()) throw Error(ErrorCode::UnknownTokenId, std::to_string(t));
  }
  const nlohmann::json request = {{"op", "next"}, {"context", std::vector<TokenId>(context.begin(), context.end())}};
  return parse_next_reply(roundtrip(request), vocab_.size(), options_.mass_tolerance);
}

std::optional<std::vector<double>> BridgeModel::embed(std::span<const TokenId> context) const {
  const nlohmann::json request = {{"op", "embed"}, {"context", std::vector<TokenId>(context.begin(), context.end())}};
  const auto reply = roundtrip(request);
  if (reply.contains("error")) throw violation("peer error: " + reply["error"].dump());
  if (!reply.contains("vec") || !reply["vec"].is_array()) throw violation("embed reply lacks \"vec\"");
  std::vector<double> vec;
  for (const auto& x : reply["vec"]) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) throw violation("non-finite embedding entry");
    vec.push_back(x.get<double>());
  }
  return vec;
}

std::unique_ptr<CausalLm> bridge_model(const std::string& endpoint, BridgeOptions options) {
  return BridgeModel::connect(endpoint, options);
}

}  // namespace genolm
