#include "superlambda/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "superlambda/errors.hpp"

namespace superlambda {

const std::vector<std::string>& csv_schema()
{
    static const std::vector<std::string> s = {
        "t_scaled_slow", "t_scaled_fast", "p1_over_N", "p2_over_N",
        "p3_over_N",     "re_c12_over_N", "im_c12_over_N", "I1",
        "I2",            "d_mm",          "d_pp",          "re_cross",
        "im_cross"};
    return s;
}

std::string format_g17(double x)
{
    char buf[64];
    const auto r =
        std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

std::string trajectory_csv(const Trajectory& traj,
                           const std::vector<std::string>& extra)
{
    std::vector<const Eigen::VectorXd*> cols;
    std::string out;
    auto names = csv_schema();
    names.insert(names.end(), extra.begin(), extra.end());
    for (std::size_t c = 0; c < names.size(); ++c) {
        cols.push_back(&traj.column(names[c]));
        out += (c ? "," : "") + names[c];
    }
    out += '\n';
    for (Eigen::Index i = 0; i < traj.size(); ++i) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) {
                out += ',';
            }
            out += format_g17((*cols[c])[i]);
        }
        out += '\n';
    }
    return out;
}

Trajectory read_trajectory_csv(const std::string& text,
                               const std::string& time_column)
{
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) {
        throw ConfigError("CSV is empty");
    }
    std::vector<std::string> names;
    {
        std::istringstream hs(line);
        std::string name;
        while (std::getline(hs, name, ',')) {
            names.push_back(name);
        }
    }
    std::vector<std::vector<double>> data(names.size());
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::size_t c = 0;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const auto comma = std::min(line.find(',', pos), line.size());
            if (c >= names.size()) {
                throw ConfigError("CSV line " + std::to_string(lineno) +
                                  ": too many fields");
            }
            double v = 0.0;
            const auto r =
                std::from_chars(line.data() + pos, line.data() + comma, v);
            if (r.ec != std::errc() || r.ptr != line.data() + comma) {
                throw ConfigError("CSV line " + std::to_string(lineno) +
                                  ": bad number in column " + names[c]);
            }
            data[c++].push_back(v);
            pos = comma + 1;
        }
        if (c != names.size()) {
            throw ConfigError("CSV line " + std::to_string(lineno) +
                              ": expected " + std::to_string(names.size()) +
                              " fields");
        }
    }
    auto to_vec = [](const std::vector<double>& v) {
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
            v.data(), static_cast<Eigen::Index>(v.size())));
    };
    const auto it = std::find(names.begin(), names.end(), time_column);
    if (it == names.end()) {
        throw ConfigError("CSV has no time column '" + time_column + "'");
    }
    const TimeUnit unit = time_column == "t_scaled_slow" ? TimeUnit::slow_scaled
                          : time_column == "t_scaled_fast"
                              ? TimeUnit::fast_scaled
                              : TimeUnit::physical;
    Trajectory traj(to_vec(data[static_cast<std::size_t>(it - names.begin())]),
                    unit);
    for (std::size_t c = 0; c < names.size(); ++c) {
        traj.add_column(names[c], to_vec(data[c]));
    }
    traj.validate();
    return traj;
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                   nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

void write_file(const std::string& path, const std::string& bytes)
{
    const std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(bytes.data(),
                           static_cast<std::streamsize>(bytes.size()))) {
        throw ConfigError("cannot write '" + path + "'");
    }
}

} // namespace superlambda
