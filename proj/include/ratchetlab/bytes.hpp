#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ratchetlab {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

template <std::size_t N>
using ByteArray = std::array<std::uint8_t, N>;

/// Overwrites memory in a way the optimizer may not elide.
void secure_wipe(std::span<std::uint8_t> buf) noexcept;

/// Constant-time equality. Lengths are not secret.
bool constant_time_equal(ByteView a, ByteView b) noexcept;

std::string to_hex(ByteView data);
/// Throws Error(Errc::parse) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

Bytes to_bytes(std::string_view text);
std::string to_string(ByteView data);

inline void append(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }

Bytes concat(std::initializer_list<ByteView> parts);

void put_u32_be(Bytes& out, std::uint32_t v);
std::uint32_t get_u32_be(ByteView in);

/// Fixed-size secret buffer, wiped on destruction and on reassignment.
template <std::size_t N>
class Secret {
public:
    Secret() { bytes_.fill(0); }
    explicit Secret(const ByteArray<N>& b) : bytes_(b) {}
    Secret(const Secret&) = default;
    Secret& operator=(const Secret& other) {
        if (this != &other) {
            wipe();
            bytes_ = other.bytes_;
        }
        return *this;
    }
    ~Secret() { wipe(); }

    std::span<const std::uint8_t, N> view() const { return bytes_; }
    std::span<std::uint8_t, N> mutable_view() { return bytes_; }
    const std::uint8_t* data() const { return bytes_.data(); }
    static constexpr std::size_t size() { return N; }
    void wipe() noexcept { secure_wipe(bytes_); }

    bool operator==(const Secret& other) const { return constant_time_equal(bytes_, other.bytes_); }

private:
    ByteArray<N> bytes_;
};

/// Variable-length secret buffer, wiped on destruction.
class SecretBytes {
public:
    SecretBytes() = default;
    explicit SecretBytes(std::size_t n) : bytes_(n, 0) {}
    explicit SecretBytes(Bytes b) : bytes_(std::move(b)) {}
    SecretBytes(const SecretBytes&) = default;
    SecretBytes(SecretBytes&& other) noexcept : bytes_(std::move(other.bytes_)) { other.bytes_.clear(); }
    SecretBytes& operator=(const SecretBytes& other) {
        if (this != &other) {
            wipe();
            bytes_ = other.bytes_;
        }
        return *this;
    }
    SecretBytes& operator=(SecretBytes&& other) noexcept {
        if (this != &other) {
            wipe();
            bytes_ = std::move(other.bytes_);
            other.bytes_.clear();
        }
        return *this;
    }
    ~SecretBytes() { wipe(); }

    ByteView view() const { return bytes_; }
    std::span<std::uint8_t> mutable_view() { return bytes_; }
    std::size_t size() const { return bytes_.size(); }
    void append(ByteView data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
    void wipe() noexcept { secure_wipe(bytes_); }

private:
    Bytes bytes_;
};

}  // namespace ratchetlab
