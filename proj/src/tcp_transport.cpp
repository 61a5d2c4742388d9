#include "privmark/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "privmark/errors.hpp"
#include "privmark/frame.hpp"

namespace privmark {

namespace {

constexpr u64 kHandshakeMagic = 0x504d48534b31ULL;  // "PMHSK1"

struct HandshakeBlob {
  u64 magic;
  u64 session_id;
  u64 seed;
  std::uint8_t from;
  std::uint8_t to;
  std::uint8_t ell;
  std::uint8_t frac_bits;
  std::uint8_t ok;
  std::uint8_t pad[3];
};
static_assert(sizeof(HandshakeBlob) == 32);

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { close_now(); }
  Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Fd& operator=(Fd&& o) noexcept {
    close_now();
    fd_ = o.fd_;
    o.fd_ = -1;
    return *this;
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close_now() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

void send_all(int fd, const void* data, size_t len) {
  const char* p = static_cast<const char*>(data);
  while (len > 0) {
    ssize_t n = ::send(fd, p, len, MSG_NOSIGNAL);
    if (n <= 0) throw TransportError("connection lost while sending");
    p += n;
    len -= static_cast<size_t>(n);
  }
}

void recv_all(int fd, void* data, size_t len) {
  char* p = static_cast<char*>(data);
  while (len > 0) {
    ssize_t n = ::recv(fd, p, len, 0);
    if (n == 0) throw TransportError("connection closed by peer");
    if (n < 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK)
        throw TimeoutError("tcp recv timed out");
      throw TransportError(std::string("tcp recv failed: ") +
                           std::strerror(errno));
    }
    p += n;
    len -= static_cast<size_t>(n);
  }
}

std::pair<std::string, int> split_hostport(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos)
    throw ConfigError("address must be host:port, got " + addr);
  std::string host = addr.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (...) {
    throw ConfigError("bad port in address " + addr);
  }
  return {host, port};
}

// Frame-structured stream: read header, then exactly the payload.
class TcpChannel : public Transport {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {}

  void send(std::span<const std::uint8_t> bytes) override {
    send_all(fd_, bytes.data(), bytes.size());
  }

  std::vector<std::uint8_t> recv(std::chrono::milliseconds timeout) override {
    struct timeval tv;
    tv.tv_sec = timeout.count() / 1000;
    tv.tv_usec = (timeout.count() % 1000) * 1000;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    std::vector<std::uint8_t> buf(Frame::kHeaderBytes);
    recv_all(fd_, buf.data(), buf.size());
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
      len |= static_cast<std::uint32_t>(buf[18 + i]) << (8 * i);
    buf.resize(Frame::kHeaderBytes + len);
    recv_all(fd_, buf.data() + Frame::kHeaderBytes, len);
    return buf;
  }

 private:
  int fd_;
};

HandshakeBlob make_blob(const HandshakeInfo& info, PartyId from, PartyId to) {
  HandshakeBlob b{};
  b.magic = kHandshakeMagic;
  b.session_id = info.session_id;
  b.seed = info.seed;
  b.from = static_cast<std::uint8_t>(index_of(from));
  b.to = static_cast<std::uint8_t>(index_of(to));
  b.ell = info.ell;
  b.frac_bits = info.frac_bits;
  b.ok = 1;
  return b;
}

void check_blob(const HandshakeBlob& got, const HandshakeInfo& want) {
  if (got.magic != kHandshakeMagic)
    throw ConfigError("handshake: wrong protocol magic");
  if (!got.ok) throw ConfigError("handshake rejected by peer");
  if (got.session_id != want.session_id)
    throw ConfigError("handshake: session id mismatch");
  if (got.ell != want.ell) throw ConfigError("handshake: ring width mismatch");
  if (got.frac_bits != want.frac_bits)
    throw ConfigError("handshake: fraction bits mismatch");
  if (got.seed != want.seed) throw ConfigError("handshake: seed mismatch");
}

}  // namespace

struct TcpMesh::Impl {
  PartyId me;
  HandshakeInfo info;
  std::chrono::milliseconds io_timeout;
  Fd listener;
  int port = 0;
  // inbound[p]: stream carrying frames p -> me; outbound[p]: me -> p.
  std::array<Fd, 3> inbound;
  std::array<Fd, 3> outbound;
  std::array<std::unique_ptr<TcpChannel>, 3> in_ch;
  std::array<std::unique_ptr<TcpChannel>, 3> out_ch;
};

TcpMesh::TcpMesh(PartyId me, const std::string& listen_addr, HandshakeInfo info,
                 std::chrono::milliseconds io_timeout)
    : impl_(std::make_unique<Impl>()) {
  impl_->me = me;
  impl_->info = info;
  impl_->io_timeout = io_timeout;

  auto [host, port] = split_hostport(listen_addr);
  Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
  if (!fd.valid()) throw TransportError("cannot create listener socket");
  int one = 1;
  ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(static_cast<std::uint16_t>(port));
  if (host.empty() || host == "0.0.0.0")
    sa.sin_addr.s_addr = INADDR_ANY;
  else if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
    hostent* he = ::gethostbyname(host.c_str());
    if (!he) throw ConfigError("cannot resolve listen host " + host);
    std::memcpy(&sa.sin_addr, he->h_addr, sizeof(sa.sin_addr));
  }
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0)
    throw TransportError("cannot bind " + listen_addr + ": " +
                         std::strerror(errno));
  if (::listen(fd.get(), 8) != 0)
    throw TransportError("cannot listen on " + listen_addr);
  sockaddr_in bound{};
  socklen_t blen = sizeof(bound);
  ::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&bound), &blen);
  impl_->port = ntohs(bound.sin_port);
  impl_->listener = std::move(fd);
}

TcpMesh::~TcpMesh() = default;

int TcpMesh::listen_port() const { return impl_->port; }

void TcpMesh::connect_peers(const std::array<std::string, 3>& peer_addrs,
                            std::chrono::milliseconds connect_timeout) {
  using Clock = std::chrono::steady_clock;
  auto deadline = Clock::now() + connect_timeout;
  PartyId me = impl_->me;

  // Dial both peers; retry until they are up or the deadline passes.
  for (PartyId peer : {next(me), prev(me)}) {
    auto [host, port] = split_hostport(peer_addrs[index_of(peer)]);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
      hostent* he = ::gethostbyname(host.c_str());
      if (!he)
        throw TransportError("cannot resolve peer host " + host);
      std::memcpy(&sa.sin_addr, he->h_addr, sizeof(sa.sin_addr));
    }
    Fd fd;
    for (;;) {
      fd = Fd(::socket(AF_INET, SOCK_STREAM, 0));
      if (!fd.valid()) throw TransportError("cannot create socket");
      if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) ==
          0)
        break;
      fd.close_now();
      if (Clock::now() >= deadline)
        throw TransportError("cannot connect to peer " +
                             peer_addrs[index_of(peer)]);
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    int one = 1;
    ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    HandshakeBlob mine = make_blob(impl_->info, me, peer);
    send_all(fd.get(), &mine, sizeof(mine));
    HandshakeBlob theirs{};
    recv_all(fd.get(), &theirs, sizeof(theirs));
    check_blob(theirs, impl_->info);
    impl_->outbound[index_of(peer)] = std::move(fd);
  }

  // Accept the two inbound streams; identity comes from the blob.
  int accepted = 0;
  while (accepted < 2) {
    if (Clock::now() >= deadline)
      throw TransportError("timed out waiting for inbound connections");
    Fd fd(::accept(impl_->listener.get(), nullptr, nullptr));
    if (!fd.valid()) continue;
    HandshakeBlob theirs{};
    try {
      recv_all(fd.get(), &theirs, sizeof(theirs));
      check_blob(theirs, impl_->info);
    } catch (const ConfigError&) {
      HandshakeBlob nack = make_blob(impl_->info, me, me);
      nack.ok = 0;
      send_all(fd.get(), &nack, sizeof(nack));
      throw;
    }
    if (theirs.to != static_cast<std::uint8_t>(index_of(me)) ||
        theirs.from > 2)
      throw ConfigError("handshake: misrouted connection");
    HandshakeBlob mine =
        make_blob(impl_->info, me, party_from_index(theirs.from));
    send_all(fd.get(), &mine, sizeof(mine));
    int one = 1;
    ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    impl_->inbound[theirs.from] = std::move(fd);
    ++accepted;
  }

  for (PartyId peer : {next(me), prev(me)}) {
    int p = index_of(peer);
    impl_->out_ch[p] = std::make_unique<TcpChannel>(impl_->outbound[p].get());
    impl_->in_ch[p] = std::make_unique<TcpChannel>(impl_->inbound[p].get());
  }
}

PartyChannels TcpMesh::channels() {
  PartyChannels ch;
  ch.to_next = impl_->out_ch[index_of(next(impl_->me))].get();
  ch.to_prev = impl_->out_ch[index_of(prev(impl_->me))].get();
  ch.from_next = impl_->in_ch[index_of(next(impl_->me))].get();
  ch.from_prev = impl_->in_ch[index_of(prev(impl_->me))].get();
  if (!ch.to_next || !ch.to_prev || !ch.from_next || !ch.from_prev)
    throw TransportError("tcp mesh is not connected");
  return ch;
}

}  // namespace privmark
