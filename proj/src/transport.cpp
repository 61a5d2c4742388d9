#include "privmark/transport.hpp"

#include <thread>

namespace privmark {

using Clock = std::chrono::steady_clock;

class InMemoryHub::Queue : public Transport {
 public:
  Queue(NetworkProfile profile, size_t capacity)
      : profile_(profile), capacity_(capacity) {}

  void send(std::span<const std::uint8_t> bytes) override {
    std::unique_lock<std::mutex> lk(m_);
    cv_space_.wait(lk, [&] { return q_.size() < capacity_; });
    Msg msg;
    msg.bytes.assign(bytes.begin(), bytes.end());
    msg.ready = delivery_time(bytes.size());
    q_.push_back(std::move(msg));
    cv_data_.notify_all();
  }

  std::vector<std::uint8_t> recv(std::chrono::milliseconds timeout) override {
    std::unique_lock<std::mutex> lk(m_);
    if (timeout.count() > 0) {
      if (!cv_data_.wait_for(lk, timeout, [&] { return !q_.empty(); }))
        throw TimeoutError("recv timed out");
    } else {
      cv_data_.wait(lk, [&] { return !q_.empty(); });
    }
    Msg msg = std::move(q_.front());
    q_.pop_front();
    cv_space_.notify_all();
    lk.unlock();
    // Shaped delivery: the receiver cannot observe the message before its
    // arrival time.
    auto now = Clock::now();
    if (msg.ready > now) std::this_thread::sleep_until(msg.ready);
    return std::move(msg.bytes);
  }

  size_t depth() const {
    std::lock_guard<std::mutex> lk(m_);
    return q_.size();
  }

 private:
  struct Msg {
    std::vector<std::uint8_t> bytes;
    Clock::time_point ready;
  };

  Clock::time_point delivery_time(size_t bytes) {
    auto now = Clock::now();
    if (!profile_.shaped()) return now;
    // The link serializes messages one after another.
    auto start = std::max(now, link_free_);
    Clock::duration ser{0};
    if (profile_.bandwidth_bps > 0.0) {
      double sec = static_cast<double>(bytes) * 8.0 / profile_.bandwidth_bps;
      ser = std::chrono::duration_cast<Clock::duration>(
          std::chrono::duration<double>(sec));
    }
    link_free_ = start + ser;
    auto lat = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(profile_.latency_s));
    return link_free_ + lat;
  }

  NetworkProfile profile_;
  size_t capacity_;
  mutable std::mutex m_;
  std::condition_variable cv_data_;
  std::condition_variable cv_space_;
  std::deque<Msg> q_;
  Clock::time_point link_free_ = Clock::time_point::min();
};

InMemoryHub::InMemoryHub(NetworkProfile profile, size_t queue_capacity)
    : profile_(profile) {
  for (int from = 0; from < 3; ++from)
    for (int to = 0; to < 3; ++to)
      if (from != to)
        queues_[from][to] = std::make_unique<Queue>(profile, queue_capacity);
}

InMemoryHub::~InMemoryHub() = default;

PartyChannels InMemoryHub::channels_for(PartyId p) {
  int me = index_of(p);
  int nx = index_of(next(p));
  int pv = index_of(prev(p));
  PartyChannels ch;
  ch.to_next = queues_[me][nx].get();
  ch.to_prev = queues_[me][pv].get();
  ch.from_next = queues_[nx][me].get();
  ch.from_prev = queues_[pv][me].get();
  return ch;
}

size_t InMemoryHub::in_flight() const {
  size_t n = 0;
  for (int from = 0; from < 3; ++from)
    for (int to = 0; to < 3; ++to)
      if (from != to) n += queues_[from][to]->depth();
  return n;
}

}  // namespace privmark
