#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trellis {

/// Non-empty finite sequence with value semantics.
///
/// Extension shares the underlying buffer: a trace is a (buffer, length)
/// view and elements below `length` are never mutated once written, so
/// every copy observes the same items it was created with. Appending to the
/// longest view is amortized O(1); appending to a shorter view copies the
/// prefix unless the view is the sole holder of the buffer.
///
/// Not safe for concurrent extension of views sharing one buffer.
template <class T>
class FiniteTrace {
 public:
  explicit FiniteTrace(T first)
      : items_(std::make_shared<std::vector<T>>()), length_(1) {
    items_->push_back(std::move(first));
  }

  static FiniteTrace from(std::vector<T> items) {
    if (items.empty()) throw std::invalid_argument("trace must be non-empty");
    FiniteTrace t;
    t.length_ = items.size();
    t.items_ = std::make_shared<std::vector<T>>(std::move(items));
    return t;
  }

  std::size_t length() const { return length_; }
  const T& first() const { return (*items_)[0]; }
  const T& last() const { return (*items_)[length_ - 1]; }

  const T& lookup(std::size_t i) const {
    if (i >= length_) throw std::out_of_range("trace index out of range");
    return (*items_)[i];
  }
  const T& operator[](std::size_t i) const { return (*items_)[i]; }

  FiniteTrace extend(T a) const {
    FiniteTrace out;
    out.length_ = length_ + 1;
    if (items_->size() == length_) {
      out.items_ = items_;
    } else if (items_.use_count() == 1) {
      // Only this view can observe the buffer; anything beyond length_ is
      // an abandoned extension.
      items_->resize(length_);
      out.items_ = items_;
    } else {
      out.items_ = std::make_shared<std::vector<T>>(items_->begin(),
                                                    items_->begin() + length_);
    }
    out.items_->push_back(std::move(a));
    return out;
  }

  /// First `n` elements (1 <= n <= length), sharing storage.
  FiniteTrace prefix(std::size_t n) const {
    if (n == 0 || n > length_) throw std::out_of_range("bad prefix length");
    FiniteTrace out = *this;
    out.length_ = n;
    return out;
  }

  std::vector<T> to_vector() const {
    return {items_->begin(), items_->begin() + length_};
  }

  auto begin() const { return items_->cbegin(); }
  auto end() const { return items_->cbegin() + length_; }

  /// Identity of the shared storage; used by prefix caches.
  const void* storage_id() const { return items_.get(); }

  friend bool operator==(const FiniteTrace& a, const FiniteTrace& b)
    requires requires(const T& x, const T& y) { x == y; }
  {
    if (a.length_ != b.length_) return false;
    for (std::size_t i = 0; i < a.length_; ++i)
      if (!(a[i] == b[i])) return false;
    return true;
  }

 private:
  FiniteTrace() = default;

  std::shared_ptr<std::vector<T>> items_;
  std::size_t length_ = 0;
};

template <class T>
FiniteTrace<T> extend(const FiniteTrace<T>& t, T a) {
  return t.extend(std::move(a));
}

/// Decides whether the second element is a legal successor of the first.
template <class T>
using StepOracle = std::function<bool(const T&, const T&)>;

template <class T>
bool valid_trace(const FiniteTrace<T>& t, const StepOracle<T>& step) {
  for (std::size_t i = 0; i + 1 < t.length(); ++i)
    if (!step(t[i], t[i + 1])) return false;
  return true;
}

/// Bounded stand-in for a possibly-infinite trace: a stateful producer that
/// yields at most `horizon` elements.
template <class T>
class TraceSource {
 public:
  using Generator = std::function<std::optional<T>()>;

  TraceSource(Generator gen, std::size_t horizon)
      : gen_(std::move(gen)), horizon_(horizon) {}

  /// Next element, or nullopt once the generator ends or the horizon is hit.
  std::optional<T> next() {
    if (done_ || produced_ >= horizon_) {
      done_ = true;
      return std::nullopt;
    }
    auto v = gen_();
    if (!v) {
      done_ = true;
      return std::nullopt;
    }
    ++produced_;
    return v;
  }

  /// Like next(), but reading past the end is an error.
  T take() {
    auto v = next();
    if (!v) throw std::out_of_range("trace source exhausted");
    return std::move(*v);
  }

  bool exhausted() const { return done_; }
  std::size_t produced() const { return produced_; }
  std::size_t horizon() const { return horizon_; }

 private:
  Generator gen_;
  std::size_t horizon_;
  std::size_t produced_ = 0;
  bool done_ = false;
};

template <class T>
TraceSource<T> source_from_vector(std::vector<T> items) {
  auto data = std::make_shared<std::vector<T>>(std::move(items));
  auto pos = std::make_shared<std::size_t>(0);
  std::size_t n = data->size();
  return TraceSource<T>(
      [data, pos]() -> std::optional<T> {
        if (*pos >= data->size()) return std::nullopt;
        return (*data)[(*pos)++];
      },
      n);
}

/// Appends up to `n` elements drawn from `s` onto `t`.
template <class T>
FiniteTrace<T> unroll(std::size_t n, FiniteTrace<T> t, TraceSource<T>& s) {
  for (std::size_t i = 0; i < n; ++i) {
    auto v = s.next();
    if (!v) break;
    t = t.extend(std::move(*v));
  }
  return t;
}

/// Advances `s` past up to `n` elements.
template <class T>
TraceSource<T>& drop_prefix(std::size_t n, TraceSource<T>& s) {
  for (std::size_t i = 0; i < n; ++i)
    if (!s.next()) break;
  return s;
}

}  // namespace trellis
