#pragma once

// Problem files and generation.
//
// Matrix formats:
//   binary — "GLMA", uint64 rows, uint64 cols (little endian), then rows*cols
//            little-endian IEEE-754 doubles in row-major order;
//   CSV    — one matrix row per line, comma separated.
// Vectors are written one value per line.
// A problem directory holds problem.cfg (key = value) naming the other files.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "glmamp/engine.hpp"

namespace glmamp {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_matrix_binary(const std::filesystem::path& path, const Matrix& a);
Matrix read_matrix_binary(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& a);
Matrix read_matrix_csv(const std::filesystem::path& path);
/// Dispatches on the "GLMA" magic.
Matrix read_matrix(const std::filesystem::path& path);

void write_vector(const std::filesystem::path& path, const std::vector<double>& v);
std::vector<double> read_vector(const std::filesystem::path& path);

using KeyValues = std::map<std::string, std::string>;
/// `key = value` per line; '#' starts a comment.
KeyValues read_key_values(const std::filesystem::path& path);

/// Entry distribution of a generated sensing matrix.
///  gaussian — iid N(0, 1/m)
///  uniform  — iid U(0, 2/n), entry-wise positive (for positive-rate channels)
enum class MatrixKind { Gaussian, Uniform };

MatrixKind parse_matrix_kind(const std::string& text);
std::string to_string(MatrixKind kind);

struct GenSpec {
    std::size_t n = 64;
    std::size_t m = 128;
    std::string prior = "bg(rho=0.1,mean=0,var=1)";
    std::string channel = "probit(scale=1)";
    std::optional<MatrixKind> matrix;  // default: uniform for poisson, gaussian otherwise
    /// When set, the channel's noise parameter is replaced so that
    /// mean(z²) / noise_power = 10^{snr/10} (AWGN var, probit/logistic scale²).
    std::optional<double> snr_db;
    std::uint64_t seed = 0;
};

/// Fully determined by the spec (including its seed).
ProblemInstance generate_problem(const GenSpec& spec);

/// Writes A.glma, x_true.csv, y.csv and problem.cfg into `dir`.
void write_problem(const std::filesystem::path& dir, const ProblemInstance& problem,
                   const GenSpec& spec);
/// Reads a problem directory (or a problem.cfg path).
ProblemInstance load_problem(const std::filesystem::path& dir_or_cfg);

}  // namespace glmamp
