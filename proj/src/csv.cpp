#include "cqrm/scenarios.hpp"

#include <array>
#include <charconv>
#include <fstream>

namespace cqrm {

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        throw NumericalFailure("format_double: conversion failed");
    }
    return std::string(buf.data(), end);
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    return out;
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& rows) {
    auto out = open_output(path);
    out << kUnitsLine << '\n';
    out << "t,mean_X,mean_X2,mean_x,var_X,var_P,cov_XP,sx,sy,sz,energy,norm,tail,trusted\n";
    for (const auto& r : rows) {
        for (double v : {r.t, r.mean_X, r.mean_X2, r.mean_x, r.var_X, r.var_P, r.cov_XP, r.sx, r.sy,
                         r.sz, r.energy, r.norm, r.tail}) {
            out << format_double(v) << ',';
        }
        out << (r.trusted ? 1 : 0) << '\n';
    }
}

void write_density_csv(const std::filesystem::path& path, const DensityProfile& profile) {
    auto out = open_output(path);
    out << kUnitsLine << "; coord is "
        << (profile.coordinate == Coordinate::IonX ? "ion position X" : "particle position x") << '\n';
    out << "coord,value\n";
    for (Eigen::Index i = 0; i < profile.grid.size(); ++i) {
        out << format_double(profile.grid[i]) << ',' << format_double(profile.density[i]) << '\n';
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

}  // namespace cqrm
