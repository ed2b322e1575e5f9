// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cblue/montecarlo.hpp"

namespace cblue::io {

// Malformed input documents and unreadable files.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Matrix document:
///
///     {"rows": 2, "cols": 2, "data": [[1, 0], [0, 0], [0, 0], [4, 0]]}
///
/// `data` lists rows * cols entries in row-major order, each an [re, im] pair
/// or a bare real number.
CMatrix parse_matrix(std::string_view text);
std::string format_matrix(const CMatrix& m);
CMatrix read_matrix_file(const std::filesystem::path& path);

// Accepts an n x 1 or 1 x n matrix.
CVector as_vector(const CMatrix& m, std::string_view what);

/// Experiment configuration, a JSON object whose keys are all optional:
/// n_x, n_u, base_noise_diag, k_grid | (k_min, k_max, k_points), trials,
/// seed, true_x_policy. Unknown keys are rejected.
ExperimentSpec parse_experiment_config(std::string_view text);

// Scientific notation, 15 significant digits, '.' decimal point regardless of locale.
std::string format_number(double value);

// One row per k: k, six empirical MSE columns, six analytic MSE columns.
std::string format_csv(const MseReport& report);
inline constexpr std::string_view kCsvHeader =
    "k,mse_ls,mse_ls_meansub,mse_cls,mse_blue,mse_blue_meansub,mse_cblue,"
    "analytic_ls,analytic_ls_meansub,analytic_cls,analytic_blue,analytic_blue_meansub,"
    "analytic_cblue";

// Log-log chart of the six empirical MSE curves.
std::string format_svg(const MseReport& report);

}  // namespace cblue::io
