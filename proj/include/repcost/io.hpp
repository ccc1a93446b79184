#pragma once

#include "repcost/linalg.hpp"

#include <string>

namespace repcost {

/// Write via a temp file in the same directory, then rename over the target.
void atomic_write_text(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

/// Matrix as plain CSV: one line per row, comma-separated values. A d x n
/// sample matrix therefore has d lines of n entries (samples are columns).
std::string mat_to_csv(const Mat& M);
Mat mat_from_csv(const std::string& text);

/// Vector as a single CSV line.
std::string vec_to_csv(const Vec& v);
Vec vec_from_csv(const std::string& text);

/// Parse an angle literal: a plain number ("1.57") or a pi multiple ("0.55pi").
double parse_angle(const std::string& text);

} // namespace repcost
