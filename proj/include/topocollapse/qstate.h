// Copyright 2026 The topocollapse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOPOCOLLAPSE_QSTATE_H
#define TOPOCOLLAPSE_QSTATE_H

#include <Eigen/Dense>
#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace topocollapse {

using Complex = std::complex<double>;

/// Tolerance for algebraic identities (Hermiticity, trace, unitarity).
inline constexpr double kAlgebraicTolerance = 1e-12;
/// Tolerance for spectral checks (eigenvalues, probability sums after chained evolution).
inline constexpr double kSpectralTolerance = 1e-9;

enum class Polarization : std::uint8_t { H, V };

Polarization flipped(Polarization p);
std::string_view to_string(Polarization p);
std::optional<Polarization> parse_polarization(std::string_view text);

/// One basis label of the single-photon Hilbert space.
struct Mode {
    std::string region;
    std::string path;
    Polarization polarization = Polarization::H;

    auto operator<=>(const Mode &) const = default;
    bool operator==(const Mode &) const = default;
};

std::string to_string(const Mode &mode);

/// Ordered, duplicate-free list of modes. The order is fixed at construction.
class ModeBasis {
   public:
    explicit ModeBasis(std::vector<Mode> modes);

    std::size_t size() const {
        return modes_.size();
    }
    const Mode &operator[](std::size_t k) const {
        return modes_[k];
    }
    const std::vector<Mode> &modes() const {
        return modes_;
    }

    std::optional<std::size_t> find(const Mode &mode) const;
    /// Throws ConfigError when the mode is not part of the basis.
    std::size_t index_of(const Mode &mode) const;

    bool operator==(const ModeBasis &other) const {
        return modes_ == other.modes_;
    }

   private:
    std::vector<Mode> modes_;
    std::map<Mode, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const ModeBasis>;

BasisPtr make_basis(std::vector<Mode> modes);

/// Amplitude vector over a mode basis. Normalized unless explicitly flagged
/// sub-normalized (norm at most one).
class PureState {
   public:
    PureState(BasisPtr basis, Eigen::VectorXcd amplitudes, bool sub_normalized = false);

    const BasisPtr &basis() const {
        return basis_;
    }
    const Eigen::VectorXcd &amplitudes() const {
        return amplitudes_;
    }
    bool sub_normalized() const {
        return sub_normalized_;
    }
    double norm_squared() const {
        return amplitudes_.squaredNorm();
    }

   private:
    BasisPtr basis_;
    Eigen::VectorXcd amplitudes_;
    bool sub_normalized_;
};

/// Density matrix over a mode basis plus the probability already absorbed
/// (lost) by polarizers. trace + norm_deficit == 1 for physical states.
class DensityMatrix {
   public:
    DensityMatrix(BasisPtr basis, Eigen::MatrixXcd entries, double norm_deficit = 0.0);

    const BasisPtr &basis() const {
        return basis_;
    }
    const Eigen::MatrixXcd &entries() const {
        return entries_;
    }
    double norm_deficit() const {
        return norm_deficit_;
    }
    std::size_t dimension() const {
        return static_cast<std::size_t>(entries_.rows());
    }
    double trace() const {
        return entries_.trace().real();
    }

    // Channel implementations operate on their own copy.
    Eigen::MatrixXcd &mutable_entries() {
        return entries_;
    }
    void add_deficit(double lost) {
        norm_deficit_ += lost;
    }

   private:
    BasisPtr basis_;
    Eigen::MatrixXcd entries_;
    double norm_deficit_;
};

/// Unitary acting on `support` (basis indices), identity elsewhere.
class Unitary {
   public:
    Unitary(std::vector<std::size_t> support, Eigen::MatrixXcd matrix);

    static Unitary full(const Eigen::MatrixXcd &matrix);
    static Unitary identity(std::size_t dimension);

    const std::vector<std::size_t> &support() const {
        return support_;
    }
    const Eigen::MatrixXcd &matrix() const {
        return matrix_;
    }

    /// Dense n x n form (identity outside the support).
    Eigen::MatrixXcd dense(std::size_t dimension) const;

   private:
    std::vector<std::size_t> support_;
    Eigen::MatrixXcd matrix_;
};

DensityMatrix to_density(const PureState &psi);

/// U rho U^dagger. Throws ConfigError when the support exceeds the dimension.
DensityMatrix apply_unitary(DensityMatrix rho, const Unitary &u);

/// <m|rho|m> clamped to [0, 1]. Throws ConfigError for a mode outside the basis.
double born_probability(const DensityMatrix &rho, const Mode &mode);
double born_probability(const DensityMatrix &rho, std::size_t index);

enum class StateViolationKind { NotHermitian, TraceMismatch, NegativeEigenvalue, DeficitOutOfRange };

struct StateViolation {
    StateViolationKind kind;
    double magnitude;
    std::string detail;
};

std::string_view to_string(StateViolationKind kind);

/// Lists every violated density-matrix invariant. Empty means valid.
std::vector<StateViolation> validate(const DensityMatrix &rho);

}  // namespace topocollapse

#endif
