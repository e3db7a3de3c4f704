#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

#include "demuxsr/errors.hpp"

namespace demuxsr {

/// Shortest round-trip decimal rendering of a double. Used for all CSV
/// and canonical-text output so files are byte-stable across runs.
inline std::string fmt_double(double value) {
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    if (result.ec != std::errc())
        throw io_error("fmt_double: conversion failed");
    return std::string(buf, result.ptr);
}

/// FNV-1a 64-bit hash, rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace demuxsr
