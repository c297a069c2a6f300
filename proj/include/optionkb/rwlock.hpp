#pragma once

#include <condition_variable>
#include <cstddef>
#include <mutex>

namespace optionkb {

// Shared mutex that favours writers: once a writer waits, new readers queue
// behind it, so an upload cannot be starved by a steady stream of queries.
// Meets the SharedMutex requirements used by std::shared_lock/std::unique_lock.
class WriterPreferringMutex {
 public:
  void lock() {
    std::unique_lock lk(m_);
    ++waiting_writers_;
    cv_.wait(lk, [&] { return !writer_active_ && active_readers_ == 0; });
    --waiting_writers_;
    writer_active_ = true;
  }

  void unlock() {
    {
      std::lock_guard lk(m_);
      writer_active_ = false;
    }
    cv_.notify_all();
  }

  void lock_shared() {
    std::unique_lock lk(m_);
    cv_.wait(lk, [&] { return !writer_active_ && waiting_writers_ == 0; });
    ++active_readers_;
  }

  void unlock_shared() {
    bool last = false;
    {
      std::lock_guard lk(m_);
      last = --active_readers_ == 0;
    }
    if (last) cv_.notify_all();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::size_t active_readers_ = 0;
  std::size_t waiting_writers_ = 0;
  bool writer_active_ = false;
};

}  // namespace optionkb
