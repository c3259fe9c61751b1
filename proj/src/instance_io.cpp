#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rslope/datagen.hpp"

namespace rslope {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'L', 'P', 'I', 'N', 'S', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& value)
{
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& is)
{
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is)
        throw std::runtime_error("instance file truncated");
    return value;
}

void put_doubles(std::ostream& os, const double* data, std::size_t count)
{
    put<std::uint64_t>(os, count);
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

std::vector<double> get_doubles(std::istream& is)
{
    const auto count = get<std::uint64_t>(is);
    std::vector<double> v(count);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!is)
        throw std::runtime_error("instance file truncated");
    return v;
}

void put_indices(std::ostream& os, const std::vector<Eigen::Index>& idx)
{
    put<std::uint64_t>(os, idx.size());
    for (auto i : idx)
        put<std::int64_t>(os, static_cast<std::int64_t>(i));
}

std::vector<Eigen::Index> get_indices(std::istream& is)
{
    const auto count = get<std::uint64_t>(is);
    std::vector<Eigen::Index> idx(count);
    for (auto& i : idx)
        i = static_cast<Eigen::Index>(get<std::int64_t>(is));
    return idx;
}

Vector to_vector(const std::vector<double>& v, Eigen::Index expected, const char* what)
{
    if (static_cast<Eigen::Index>(v.size()) != expected)
        throw std::runtime_error(std::string("instance file: bad length for ") + what);
    return Eigen::Map<const Vector>(v.data(), expected);
}

} // namespace

void save_instance(const RegressionInstance& inst, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    const auto& t = inst.truth;
    os.write(kMagic, sizeof(kMagic));
    put(os, kVersion);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(inst.ds.n()));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(inst.ds.p()));
    put<std::uint64_t>(os, inst.seed);
    put<double>(os, t.sigma);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.noise.family));
    put<double>(os, t.noise.tau);
    put<double>(os, t.noise.shape);
    put_doubles(os, inst.ds.X().data(), static_cast<std::size_t>(inst.ds.X().size()));
    put_doubles(os, inst.ds.Y().data(), static_cast<std::size_t>(inst.ds.Y().size()));
    put_doubles(os, t.beta_star.data(), static_cast<std::size_t>(t.beta_star.size()));
    put_doubles(os, t.theta_star.data(), static_cast<std::size_t>(t.theta_star.size()));
    put_doubles(os, inst.xi.data(), static_cast<std::size_t>(inst.xi.size()));
    put_doubles(os, t.Sigma.data(), static_cast<std::size_t>(t.Sigma.size()));
    put_indices(os, t.support_S);
    put_indices(os, t.support_O);
    if (!os)
        throw std::runtime_error("write to '" + path + "' failed");
}

RegressionInstance load_instance(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open '" + path + "'");
    char magic[sizeof(kMagic)];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("'" + path + "' is not an instance file");
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion)
        throw std::runtime_error("unsupported instance file version " + std::to_string(version));
    const auto n = static_cast<Eigen::Index>(get<std::uint64_t>(is));
    const auto p = static_cast<Eigen::Index>(get<std::uint64_t>(is));
    const auto seed = get<std::uint64_t>(is);
    GroundTruth t;
    t.sigma = get<double>(is);
    t.noise.family = static_cast<NoiseFamily>(get<std::uint32_t>(is));
    t.noise.tau = get<double>(is);
    t.noise.shape = get<double>(is);
    const auto x = get_doubles(is);
    if (static_cast<Eigen::Index>(x.size()) != n * p)
        throw std::runtime_error("instance file: bad size for X");
    Matrix X = Eigen::Map<const Matrix>(x.data(), n, p);
    Vector Y = to_vector(get_doubles(is), n, "Y");
    t.beta_star = to_vector(get_doubles(is), p, "beta");
    t.theta_star = to_vector(get_doubles(is), n, "theta");
    Vector xi = to_vector(get_doubles(is), n, "xi");
    const auto S = get_doubles(is);
    if (static_cast<Eigen::Index>(S.size()) != p * p)
        throw std::runtime_error("instance file: bad size for Sigma");
    t.Sigma = Eigen::Map<const Matrix>(S.data(), p, p);
    t.support_S = get_indices(is);
    t.support_O = get_indices(is);
    return RegressionInstance{Dataset(std::move(X), std::move(Y)), std::move(t), seed, std::move(xi)};
}

Dataset load_dataset_csv(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty())
                continue;  // header
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": non-numeric cell");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().size() < 2)
        throw std::runtime_error(path + ": need a response column and at least one predictor");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(rows.front().size()) - 1;
    Matrix X(n, p);
    Vector Y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Y[i] = rows[static_cast<std::size_t>(i)][0];
        for (Eigen::Index j = 0; j < p; ++j)
            X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)];
    }
    return Dataset(std::move(X), std::move(Y));
}

} // namespace rslope
