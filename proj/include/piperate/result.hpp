#pragma once

#include <cassert>
#include <optional>
#include <type_traits>
#include <utility>
#include <variant>

namespace piperate {

// Minimal value-or-error return type. Operations that can fail return
// Result<T, E> where E is the module's error enum; callers must check
// ok() before value().
template <typename T, typename E>
class Result {
    static_assert(!std::is_same_v<T, E>, "value and error types must differ");

public:
    Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}
    Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}

    template <typename U,
              std::enable_if_t<std::is_convertible_v<U&&, T> &&
                                   !std::is_convertible_v<U&&, E>,
                               int> = 0>
    Result(U&& value) : v_(std::in_place_index<0>, std::forward<U>(value)) {}

    template <typename U,
              std::enable_if_t<std::is_convertible_v<U&&, E> &&
                                   !std::is_convertible_v<U&&, T>,
                               int> = 0>
    Result(U&& error) : v_(std::in_place_index<1>, std::forward<U>(error)) {}

    bool ok() const { return v_.index() == 0; }

    const T& value() const {
        assert(ok());
        return std::get<0>(v_);
    }
    T& value() {
        assert(ok());
        return std::get<0>(v_);
    }

    const E& error() const {
        assert(!ok());
        return std::get<1>(v_);
    }

private:
    std::variant<T, E> v_;
};

template <typename E>
class Result<void, E> {
public:
    Result() = default;
    Result(E error) : err_(std::move(error)) {}

    template <typename U, std::enable_if_t<std::is_convertible_v<U&&, E>, int> = 0>
    Result(U&& error) : err_(std::forward<U>(error)) {}

    bool ok() const { return !err_.has_value(); }

    const E& error() const {
        assert(!ok());
        return *err_;
    }

private:
    std::optional<E> err_;
};

}  // namespace piperate
