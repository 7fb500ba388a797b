#pragma once

#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <optional>
#include <vector>

namespace hetgnn {

// Bounded blocking queue for one producer and one consumer. close() wakes
// both sides; pop() returns nullopt once the queue is closed and drained.
template <class T>
class SpscQueue {
 public:
  explicit SpscQueue(std::size_t capacity) : buf_(capacity == 0 ? 1 : capacity) {}

  // Returns false if the queue was closed.
  bool push(T item) {
    std::unique_lock lk(mu_);
    not_full_.wait(lk, [&] { return size_ < buf_.size() || closed_; });
    if (closed_) return false;
    buf_[(head_ + size_) % buf_.size()] = std::move(item);
    ++size_;
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lk(mu_);
    not_empty_.wait(lk, [&] { return size_ > 0 || closed_; });
    if (size_ == 0) return std::nullopt;
    T item = std::move(*buf_[head_]);
    buf_[head_].reset();
    head_ = (head_ + 1) % buf_.size();
    --size_;
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t capacity() const { return buf_.size(); }

 private:
  std::vector<std::optional<T>> buf_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  bool closed_ = false;
  std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
};

}  // namespace hetgnn
