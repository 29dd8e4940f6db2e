#include "swarm/geometry.hpp"

namespace swarm {

Formation::Formation(std::string id, std::size_t r,
                     std::map<std::pair<std::size_t, std::size_t>, Vec2> disp,
                     std::vector<std::string> labels)
    : id_(std::move(id)), r_(r), disp_(std::move(disp)), labels_(std::move(labels)) {
    if (r_ < 2) throw std::invalid_argument("Formation: need at least 2 robots");
    const std::size_t expected = r_ * (r_ - 1) / 2;
    if (disp_.size() != expected)
        throw std::invalid_argument("Formation '" + id_ + "': expected " + std::to_string(expected) +
                                    " displacements, got " + std::to_string(disp_.size()));
    for (const auto& [key, v] : disp_) {
        if (key.first >= key.second || key.second >= r_)
            throw std::invalid_argument("Formation '" + id_ + "': bad pair index");
        if (!v.finite()) throw std::invalid_argument("Formation '" + id_ + "': non-finite displacement");
    }
    // Realizability: f_ij = f_ik + f_kj must hold for all triples, otherwise no
    // set of absolute positions produces these displacements.
    const double tol = 1e-9;
    for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = i + 1; j < r_; ++j)
            for (std::size_t k = 0; k < r_; ++k) {
                if (k == i || k == j) continue;
                const Vec2 direct = displacement(i, j);
                const Vec2 via = displacement(i, k) + displacement(k, j);
                if ((direct - via).norm() > tol)
                    throw std::invalid_argument("Formation '" + id_ + "': inconsistent displacements (pair " +
                                                std::to_string(i) + "," + std::to_string(j) + " via " +
                                                std::to_string(k) + ")");
            }
}

Vec2 Formation::displacement(std::size_t i, std::size_t j) const {
    if (i >= r_ || j >= r_) throw std::out_of_range("Formation::displacement: index out of range");
    if (i == j) throw std::invalid_argument("Formation::displacement: i == j");
    if (i < j) return disp_.at({i, j});
    return -disp_.at({j, i});
}

std::vector<Vec2> Formation::centroid_offsets() const {
    // c_i = (1/r) sum_k f_ik; consistency gives c_i - c_j = f_ij and sum c_i = 0.
    std::vector<Vec2> offs(r_);
    for (std::size_t i = 0; i < r_; ++i) {
        Vec2 sum;
        for (std::size_t k = 0; k < r_; ++k)
            if (k != i) sum += displacement(i, k);
        offs[i] = sum * (1.0 / static_cast<double>(r_));
    }
    return offs;
}

}  // namespace swarm
