#include "glmamp/problem_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "glmamp/spec_parse.hpp"

namespace glmamp {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMagic{'G', 'L', 'M', 'A'};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::array<unsigned char, sizeof(T)> bytes;
        std::memcpy(bytes.data(), &v, sizeof(T));
        std::reverse(bytes.begin(), bytes.end());
        std::memcpy(&v, bytes.data(), sizeof(T));
        return v;
    }
}

void write_u64(std::ostream& os, std::uint64_t v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64(std::ostream& os, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    write_u64(os, bits);
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("truncated binary matrix");
    return to_little(v);
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text, const fs::path& path, std::size_t line) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw IoError(path.string() + ":" + std::to_string(line) + ": bad number '" +
                      std::string(text) + "'");
    }
    return v;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream is(path, mode);
    if (!is) throw IoError("cannot open " + path.string());
    return is;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream os(path, mode | std::ios::trunc);
    if (!os) throw IoError("cannot write " + path.string());
    return os;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> eval_z(const Matrix& a, const std::vector<double>& x) {
    const Vector xv = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
    const Vector z = kernels::serial::matvec(a, xv);
    return {z.data(), z.data() + z.size()};
}

}  // namespace

void write_matrix_binary(const fs::path& path, const Matrix& a) {
    auto os = open_out(path, std::ios::binary);
    os.write(kMagic.data(), kMagic.size());
    write_u64(os, static_cast<std::uint64_t>(a.rows()));
    write_u64(os, static_cast<std::uint64_t>(a.cols()));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) write_f64(os, a(i, j));
    }
    if (!os) throw IoError("write failed: " + path.string());
}

Matrix read_matrix_binary(const fs::path& path) {
    auto is = open_in(path, std::ios::binary);
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
        throw IoError(path.string() + ": missing GLMA header");
    }
    const std::uint64_t rows = read_u64(is);
    const std::uint64_t cols = read_u64(is);
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24)) {
        throw IoError(path.string() + ": implausible dimensions");
    }
    Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = std::bit_cast<double>(read_u64(is));
    }
    return a;
}

void write_matrix_csv(const fs::path& path, const Matrix& a) {
    auto os = open_out(path);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (j) os << ',';
            os << format_double(a(i, j));
        }
        os << '\n';
    }
}

Matrix read_matrix_csv(const fs::path& path) {
    auto is = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            const auto end = comma == std::string::npos ? line.size() : comma;
            row.push_back(parse_double(std::string_view(line).substr(start, end - start), path, line_no));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path.string() + ": empty matrix");
    Matrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return a;
}

Matrix read_matrix(const fs::path& path) {
    auto is = open_in(path, std::ios::binary);
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (is.gcount() == 4 && magic == kMagic) return read_matrix_binary(path);
    return read_matrix_csv(path);
}

void write_vector(const fs::path& path, const std::vector<double>& v) {
    auto os = open_out(path);
    for (double x : v) os << format_double(x) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

std::vector<double> read_vector(const fs::path& path) {
    auto is = open_in(path);
    std::vector<double> v;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        v.push_back(parse_double(t, path, line_no));
    }
    return v;
}

KeyValues read_key_values(const fs::path& path) {
    auto is = open_in(path);
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

MatrixKind parse_matrix_kind(const std::string& text) {
    if (text == "gaussian") return MatrixKind::Gaussian;
    if (text == "uniform") return MatrixKind::Uniform;
    throw std::invalid_argument("unknown matrix distribution '" + text + "' (gaussian|uniform)");
}

std::string to_string(MatrixKind kind) { return kind == MatrixKind::Gaussian ? "gaussian" : "uniform"; }

ProblemInstance generate_problem(const GenSpec& spec) {
    if (spec.n == 0 || spec.m == 0) throw std::invalid_argument("gen: n and m must be positive");
    ChannelPtr channel = parse_channel(spec.channel);
    PriorPtr prior = parse_prior(spec.prior);
    const MatrixKind kind =
        spec.matrix.value_or(channel->domain() == Domain::Positive ? MatrixKind::Uniform : MatrixKind::Gaussian);

    std::mt19937_64 rng(spec.seed);
    const auto m = static_cast<Eigen::Index>(spec.m);
    const auto n = static_cast<Eigen::Index>(spec.n);
    Matrix a(m, n);
    if (kind == MatrixKind::Gaussian) {
        std::normal_distribution<double> entry(0.0, 1.0 / std::sqrt(static_cast<double>(spec.m)));
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < n; ++j) a(i, j) = entry(rng);
    } else {
        std::uniform_real_distribution<double> entry(0.0, 2.0 / static_cast<double>(spec.n));
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < n; ++j) a(i, j) = entry(rng);
    }

    std::vector<double> x(spec.n);
    for (auto& v : x) v = prior->sample(rng);
    const std::vector<double> z = eval_z(a, x);

    if (spec.snr_db) {
        double power = 0.0;
        for (double v : z) power += v * v;
        power /= static_cast<double>(z.size());
        const double noise = power / std::pow(10.0, *spec.snr_db / 10.0);
        if (!(noise > 0.0)) throw std::invalid_argument("gen: signal power is zero, cannot set SNR");
        const std::string family = channel->family();
        if (family == "awgn") {
            channel = std::make_shared<AwgnChannel>(noise);
        } else if (family == "probit") {
            channel = std::make_shared<ProbitChannel>(std::sqrt(noise));
        } else if (family == "logistic") {
            channel = std::make_shared<LogisticChannel>(std::sqrt(noise));
        } else {
            throw std::invalid_argument("gen: SNR is not defined for channel " + channel->spec());
        }
    }

    std::vector<double> y(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) {
        if (channel->domain() == Domain::Positive && !(z[i] > 0.0)) {
            throw std::invalid_argument("gen: (Ax)_" + std::to_string(i) + " = " + std::to_string(z[i]) +
                                        " is outside the domain of " + channel->spec() +
                                        "; use a positive prior with the uniform matrix");
        }
        y[i] = channel->sample(z[i], rng);
    }

    ProblemInstance problem{LinearModel(std::move(a)), std::move(y), channel, prior, std::move(x)};
    problem.validate();
    return problem;
}

void write_problem(const fs::path& dir, const ProblemInstance& problem, const GenSpec& spec) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_matrix_binary(dir / "A.glma", problem.model.a());
    write_vector(dir / "y.csv", problem.y);
    if (problem.x_true) write_vector(dir / "x_true.csv", *problem.x_true);
    auto os = open_out(dir / "problem.cfg");
    os << "# generated problem\n"
       << "n = " << problem.n() << '\n'
       << "m = " << problem.m() << '\n'
       << "seed = " << spec.seed << '\n'
       << "channel = " << problem.channel->spec() << '\n'
       << "prior = " << problem.prior->spec() << '\n'
       << "matrix = A.glma\n"
       << "y = y.csv\n";
    if (problem.x_true) os << "x_true = x_true.csv\n";
}

ProblemInstance load_problem(const fs::path& dir_or_cfg) {
    const fs::path cfg = fs::is_directory(dir_or_cfg) ? dir_or_cfg / "problem.cfg" : dir_or_cfg;
    if (!fs::exists(cfg)) throw IoError("missing problem file " + cfg.string());
    const fs::path base = cfg.parent_path();
    const KeyValues kv = read_key_values(cfg);
    const auto need = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw IoError(cfg.string() + ": missing key '" + key + "'");
        return it->second;
    };
    const auto resolve = [&](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() ? path : base / path;
    };
    ChannelPtr channel = parse_channel(need("channel"));
    PriorPtr prior = parse_prior(need("prior"));
    Matrix a = read_matrix(resolve(need("matrix")));
    std::vector<double> y = read_vector(resolve(need("y")));
    std::optional<std::vector<double>> x_true;
    if (const auto it = kv.find("x_true"); it != kv.end()) x_true = read_vector(resolve(it->second));
    ProblemInstance problem{LinearModel(std::move(a)), std::move(y), channel, prior, std::move(x_true)};
    problem.validate();
    return problem;
}

}  // namespace glmamp
