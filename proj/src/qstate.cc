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

#include "topocollapse/qstate.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "topocollapse/error.h"

namespace topocollapse {

Polarization flipped(Polarization p) {
    return p == Polarization::H ? Polarization::V : Polarization::H;
}

std::string_view to_string(Polarization p) {
    return p == Polarization::H ? "H" : "V";
}

std::optional<Polarization> parse_polarization(std::string_view text) {
    if (text == "H") {
        return Polarization::H;
    }
    if (text == "V") {
        return Polarization::V;
    }
    return std::nullopt;
}

std::string to_string(const Mode &mode) {
    std::string out = mode.region;
    out += '/';
    out += mode.path;
    out += '/';
    out += to_string(mode.polarization);
    return out;
}

ModeBasis::ModeBasis(std::vector<Mode> modes) : modes_(std::move(modes)) {
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        auto [it, inserted] = index_.emplace(modes_[k], k);
        if (!inserted) {
            throw ConfigError("duplicate mode in basis: " + to_string(modes_[k]));
        }
    }
}

std::optional<std::size_t> ModeBasis::find(const Mode &mode) const {
    auto it = index_.find(mode);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t ModeBasis::index_of(const Mode &mode) const {
    auto k = find(mode);
    if (!k) {
        throw ConfigError("unknown mode: " + to_string(mode));
    }
    return *k;
}

BasisPtr make_basis(std::vector<Mode> modes) {
    return std::make_shared<const ModeBasis>(std::move(modes));
}

PureState::PureState(BasisPtr basis, Eigen::VectorXcd amplitudes, bool sub_normalized)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)), sub_normalized_(sub_normalized) {
    if (!basis_) {
        throw ConfigError("pure state requires a mode basis");
    }
    if (static_cast<std::size_t>(amplitudes_.size()) != basis_->size()) {
        throw ConfigError("amplitude count does not match the mode basis");
    }
    double norm = amplitudes_.squaredNorm();
    if (sub_normalized_) {
        if (norm > 1.0 + kAlgebraicTolerance) {
            throw ConfigError("sub-normalized state has norm above one");
        }
    } else if (std::abs(norm - 1.0) > kAlgebraicTolerance) {
        std::ostringstream msg;
        msg << "state is not normalized (squared norm " << norm << ")";
        throw ConfigError(msg.str());
    }
}

DensityMatrix::DensityMatrix(BasisPtr basis, Eigen::MatrixXcd entries, double norm_deficit)
    : basis_(std::move(basis)), entries_(std::move(entries)), norm_deficit_(norm_deficit) {
    if (!basis_) {
        throw ConfigError("density matrix requires a mode basis");
    }
    auto n = static_cast<Eigen::Index>(basis_->size());
    if (entries_.rows() != n || entries_.cols() != n) {
        throw ConfigError("density matrix shape does not match the mode basis");
    }
}

Unitary::Unitary(std::vector<std::size_t> support, Eigen::MatrixXcd matrix)
    : support_(std::move(support)), matrix_(std::move(matrix)) {
    auto k = static_cast<Eigen::Index>(support_.size());
    if (matrix_.rows() != k || matrix_.cols() != k) {
        throw ConfigError("unitary block does not match its support");
    }
    std::set<std::size_t> distinct(support_.begin(), support_.end());
    if (distinct.size() != support_.size()) {
        throw ConfigError("unitary support has repeated indices");
    }
    Eigen::MatrixXcd defect = matrix_.adjoint() * matrix_ - Eigen::MatrixXcd::Identity(k, k);
    if (k > 0 && defect.cwiseAbs().maxCoeff() > kAlgebraicTolerance) {
        throw ConfigError("matrix is not unitary");
    }
}

Unitary Unitary::full(const Eigen::MatrixXcd &matrix) {
    std::vector<std::size_t> support(static_cast<std::size_t>(matrix.rows()));
    for (std::size_t k = 0; k < support.size(); ++k) {
        support[k] = k;
    }
    return Unitary(std::move(support), matrix);
}

Unitary Unitary::identity(std::size_t dimension) {
    auto n = static_cast<Eigen::Index>(dimension);
    return full(Eigen::MatrixXcd::Identity(n, n));
}

Eigen::MatrixXcd Unitary::dense(std::size_t dimension) const {
    auto n = static_cast<Eigen::Index>(dimension);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(n, n);
    for (std::size_t a = 0; a < support_.size(); ++a) {
        if (support_[a] >= dimension) {
            throw ConfigError("unitary support exceeds dimension");
        }
        out(static_cast<Eigen::Index>(support_[a]), static_cast<Eigen::Index>(support_[a])) = 0.0;
    }
    for (std::size_t a = 0; a < support_.size(); ++a) {
        for (std::size_t b = 0; b < support_.size(); ++b) {
            out(static_cast<Eigen::Index>(support_[a]), static_cast<Eigen::Index>(support_[b])) =
                matrix_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
    }
    return out;
}

DensityMatrix to_density(const PureState &psi) {
    const auto &a = psi.amplitudes();
    Eigen::MatrixXcd rho = a * a.adjoint();
    double deficit = std::max(0.0, 1.0 - psi.norm_squared());
    return DensityMatrix(psi.basis(), std::move(rho), deficit);
}

DensityMatrix apply_unitary(DensityMatrix rho, const Unitary &u) {
    const auto &support = u.support();
    const auto n = static_cast<Eigen::Index>(rho.dimension());
    const auto k = static_cast<Eigen::Index>(support.size());
    for (auto s : support) {
        if (static_cast<Eigen::Index>(s) >= n) {
            throw ConfigError("unitary support exceeds density matrix dimension");
        }
    }
    if (k == 0) {
        return rho;
    }
    auto &m = rho.mutable_entries();
    const auto &block = u.matrix();

    // Left multiplication only touches the supported rows, right
    // multiplication by U^dagger only the supported columns.
    Eigen::MatrixXcd rows(k, n);
    for (Eigen::Index a = 0; a < k; ++a) {
        rows.row(a) = m.row(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)]));
    }
    Eigen::MatrixXcd mixed_rows = block * rows;
    for (Eigen::Index a = 0; a < k; ++a) {
        m.row(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)])) = mixed_rows.row(a);
    }

    Eigen::MatrixXcd cols(n, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        cols.col(a) = m.col(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)]));
    }
    Eigen::MatrixXcd mixed_cols = cols * block.adjoint();
    for (Eigen::Index a = 0; a < k; ++a) {
        m.col(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)])) = mixed_cols.col(a);
    }
    return rho;
}

double born_probability(const DensityMatrix &rho, std::size_t index) {
    if (index >= rho.dimension()) {
        throw ConfigError("mode index outside the basis");
    }
    auto k = static_cast<Eigen::Index>(index);
    return std::clamp(rho.entries()(k, k).real(), 0.0, 1.0);
}

double born_probability(const DensityMatrix &rho, const Mode &mode) {
    return born_probability(rho, rho.basis()->index_of(mode));
}

std::string_view to_string(StateViolationKind kind) {
    switch (kind) {
        case StateViolationKind::NotHermitian:
            return "not-hermitian";
        case StateViolationKind::TraceMismatch:
            return "trace-mismatch";
        case StateViolationKind::NegativeEigenvalue:
            return "negative-eigenvalue";
        case StateViolationKind::DeficitOutOfRange:
            return "deficit-out-of-range";
    }
    return "?";
}

std::vector<StateViolation> validate(const DensityMatrix &rho) {
    std::vector<StateViolation> out;
    const auto &m = rho.entries();
    if (m.size() == 0) {
        if (std::abs(rho.norm_deficit() - 1.0) > kAlgebraicTolerance) {
            out.push_back({StateViolationKind::TraceMismatch, std::abs(rho.norm_deficit() - 1.0), "empty basis"});
        }
        return out;
    }

    double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kAlgebraicTolerance) {
        out.push_back({StateViolationKind::NotHermitian, herm, "max |rho - rho^dagger| entry"});
    }

    double trace_gap = std::abs(rho.trace() + rho.norm_deficit() - 1.0);
    if (trace_gap > kAlgebraicTolerance) {
        std::ostringstream msg;
        msg << "trace " << rho.trace() << " + deficit " << rho.norm_deficit() << " != 1";
        out.push_back({StateViolationKind::TraceMismatch, trace_gap, msg.str()});
    }

    if (rho.norm_deficit() < -kAlgebraicTolerance || rho.norm_deficit() > 1.0 + kAlgebraicTolerance) {
        out.push_back({StateViolationKind::DeficitOutOfRange, rho.norm_deficit(), "norm deficit outside [0, 1]"});
    }

    // The spectrum is taken from the Hermitian part so that a non-Hermitian
    // input is still reported once, under NotHermitian.
    Eigen::MatrixXcd hermitian_part = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian_part, Eigen::EigenvaluesOnly);
    double smallest = solver.eigenvalues().minCoeff();
    if (smallest < -kSpectralTolerance) {
        std::ostringstream msg;
        msg << "smallest eigenvalue " << smallest;
        out.push_back({StateViolationKind::NegativeEigenvalue, -smallest, msg.str()});
    }
    return out;
}

}  // namespace topocollapse
