#include "thinopt/tmm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

namespace thinopt {

namespace {

constexpr double kDeg2Rad = std::numbers::pi / 180.0;
constexpr double kClampTol = 1e-12; // FP noise allowance on A/R/T

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Solver internals run in the conjugate (n - ik) time convention so that
// absorbing layers attenuate; see the conventions block in the header.
// Stored data stays n + ik and is conjugated on entry.
std::complex<double> to_solver(std::complex<double> nk) { return std::conj(nk); }

// cos(theta_j) from the complex Snell law for an already-conjugated index,
// branch chosen so the wave decays into medium j (Im(N cos) <= 0 in this
// convention) or, when lossless and propagating, travels forward (Re > 0).
std::complex<double> cos_theta_in(std::complex<double> nk, std::complex<double> n0_sin_theta0) {
    const std::complex<double> s = n0_sin_theta0 / nk;
    std::complex<double> c = std::sqrt(1.0 - s * s);
    const std::complex<double> w = nk * c;
    if (w.imag() > 0.0 || (w.imag() == 0.0 && w.real() < 0.0)) c = -c;
    return c;
}

std::complex<double> admittance(std::complex<double> nk, std::complex<double> cos_theta,
                                Polarization pol) {
    return pol == Polarization::S ? nk * cos_theta : nk / cos_theta;
}

struct Rta {
    double reflection, transmission, absorption;
};

// One (lambda, angle, polarization) solve over prefetched indices.
Rta solve_single(std::complex<double> incident_nk, std::span<const std::complex<double>> layer_nk,
                 std::span<const double> thickness_nm, std::complex<double> substrate_nk,
                 double lambda_nm, double theta_deg, Polarization pol) {
    if (std::abs(incident_nk.imag()) > 1e-12)
        throw InputError("incident medium must be transparent (k=0), got k=" +
                         fmt(incident_nk.imag()));
    const double theta0 = theta_deg * kDeg2Rad;
    const std::complex<double> n0_sin = incident_nk * std::sin(theta0);
    const std::complex<double> cos0 = std::cos(theta0);
    const double eta0 = admittance(incident_nk, cos0, pol).real();

    Mat2c m; // identity
    for (std::size_t j = 0; j < layer_nk.size(); ++j) {
        const std::complex<double> nk = to_solver(layer_nk[j]);
        const std::complex<double> ct = cos_theta_in(nk, n0_sin);
        const std::complex<double> eta = admittance(nk, ct, pol);
        const std::complex<double> delta =
            2.0 * std::numbers::pi * nk * thickness_nm[j] * ct / lambda_nm;
        const std::complex<double> cd = std::cos(delta);
        const std::complex<double> sd = std::sin(delta);
        const std::complex<double> i_sd(-sd.imag(), sd.real()); // i*sin(delta)
        m = m * Mat2c{cd, i_sd / eta, i_sd * eta, cd};
    }

    const std::complex<double> sub = to_solver(substrate_nk);
    const std::complex<double> eta_sub = admittance(sub, cos_theta_in(sub, n0_sin), pol);
    const std::complex<double> b = m.m00 + m.m01 * eta_sub;
    const std::complex<double> c = m.m10 + m.m11 * eta_sub;
    const std::complex<double> denom = eta0 * b + c;
    const std::complex<double> r = (eta0 * b - c) / denom;
    const std::complex<double> t = 2.0 * eta0 / denom;

    Rta out;
    out.reflection = std::norm(r);
    out.transmission = eta_sub.real() * std::norm(t) / eta0;
    out.absorption = 1.0 - out.reflection - out.transmission;

    auto clamp01 = [&](double& v, const char* what) {
        if (v < -kClampTol || v > 1.0 + kClampTol)
            throw Error(std::string(what) + " = " + fmt(v) + " outside [0,1] at lambda=" +
                        fmt(lambda_nm) + " nm, theta=" + fmt(theta_deg) + " deg");
        v = std::clamp(v, 0.0, 1.0);
    };
    clamp01(out.reflection, "R");
    clamp01(out.transmission, "T");
    clamp01(out.absorption, "A");
    return out;
}

void check_angle(double theta_deg) {
    if (!(theta_deg >= 0.0) || theta_deg >= 90.0)
        throw InputError("incidence angle " + fmt(theta_deg) + " deg outside [0, 90)");
}

void check_thickness(double d) {
    if (!(d > 0.0) || !std::isfinite(d))
        throw InputError("layer thickness " + fmt(d) + " nm must be positive finite");
}

std::vector<Spectrum> solve_spectra(std::span<const std::complex<double>> incident_nk,
                                    std::span<const std::vector<std::complex<double>>> layer_nk,
                                    std::span<const double> thickness_nm,
                                    std::span<const std::complex<double>> substrate_nk,
                                    std::span<const double> grid_nm,
                                    const IncidenceSpec& incidence) {
    if (incidence.angles_deg.empty()) throw InputError("incidence angle list is empty");
    for (double d : thickness_nm) check_thickness(d);

    std::vector<std::complex<double>> nk_at_lambda(layer_nk.size());
    std::vector<Spectrum> out;
    out.reserve(incidence.angles_deg.size());
    for (double theta : incidence.angles_deg) {
        check_angle(theta);
        Spectrum s;
        s.wavelengths_nm.assign(grid_nm.begin(), grid_nm.end());
        s.angle_deg = theta;
        s.absorption.reserve(grid_nm.size());
        s.reflection.reserve(grid_nm.size());
        s.transmission.reserve(grid_nm.size());
        for (std::size_t i = 0; i < grid_nm.size(); ++i) {
            for (std::size_t j = 0; j < layer_nk.size(); ++j) nk_at_lambda[j] = layer_nk[j][i];
            Rta rta{};
            if (incidence.polarization == Polarization::Unpolarized) {
                const Rta rs = solve_single(incident_nk[i], nk_at_lambda, thickness_nm,
                                            substrate_nk[i], grid_nm[i], theta, Polarization::S);
                const Rta rp = solve_single(incident_nk[i], nk_at_lambda, thickness_nm,
                                            substrate_nk[i], grid_nm[i], theta, Polarization::P);
                rta.reflection = 0.5 * (rs.reflection + rp.reflection);
                rta.transmission = 0.5 * (rs.transmission + rp.transmission);
                rta.absorption = 1.0 - rta.reflection - rta.transmission;
                if (rta.absorption < 0.0) rta.absorption = 0.0;
            } else {
                rta = solve_single(incident_nk[i], nk_at_lambda, thickness_nm, substrate_nk[i],
                                   grid_nm[i], theta, incidence.polarization);
            }
            s.reflection.push_back(rta.reflection);
            s.transmission.push_back(rta.transmission);
            s.absorption.push_back(rta.absorption);
        }
        out.push_back(std::move(s));
    }
    return out;
}

void check_same_grid(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || !std::equal(a.begin(), a.end(), b.begin()))
        throw InputError("spectrum and target wavelength grids differ");
}

} // namespace

void TargetSpectrum::validate() const {
    if (wavelengths_nm.empty()) throw InputError("target spectrum is empty");
    if (target.size() != wavelengths_nm.size() || weights.size() != wavelengths_nm.size())
        throw InputError("target spectrum column lengths differ");
    double wsum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (!(target[i] >= 0.0 && target[i] <= 1.0))
            throw InputError("target value " + fmt(target[i]) + " outside [0,1]");
        if (!(weights[i] >= 0.0)) throw InputError("negative target weight");
        wsum += weights[i];
    }
    if (wsum == 0.0) throw InputError("target weights are all zero");
}

TargetSpectrum TargetSpectrum::from_bands(std::span<const double> grid,
                                          std::span<const Band> bands, double default_value,
                                          SpectrumComponent component) {
    TargetSpectrum t;
    t.wavelengths_nm.assign(grid.begin(), grid.end());
    t.component = component;
    t.weights.assign(grid.size(), 1.0);
    t.target.reserve(grid.size());
    for (double w : grid) {
        double v = default_value;
        for (const auto& b : bands)
            if (w >= b.from_nm && w <= b.to_nm) v = b.value;
        t.target.push_back(v);
    }
    t.validate();
    return t;
}

Mat2c characteristic_matrix(std::complex<double> nk, double thickness_nm, double lambda_nm,
                            double theta_deg, Polarization pol, std::complex<double> incident_nk) {
    if (pol == Polarization::Unpolarized)
        throw InputError("characteristic matrix needs a definite polarization (S or P)");
    check_angle(theta_deg);
    check_thickness(thickness_nm);
    if (!(lambda_nm > 0.0)) throw InputError("wavelength must be positive");

    nk = to_solver(nk);
    const std::complex<double> n0_sin = to_solver(incident_nk) * std::sin(theta_deg * kDeg2Rad);
    const std::complex<double> ct = cos_theta_in(nk, n0_sin);
    const std::complex<double> eta = admittance(nk, ct, pol);
    const std::complex<double> delta = 2.0 * std::numbers::pi * nk * thickness_nm * ct / lambda_nm;
    const std::complex<double> cd = std::cos(delta);
    const std::complex<double> sd = std::sin(delta);
    const std::complex<double> i_sd(-sd.imag(), sd.real());
    return {cd, i_sd / eta, i_sd * eta, cd};
}

std::vector<Spectrum> compute_spectra(const Stack& stack, std::span<const double> grid_nm,
                                      const IncidenceSpec& incidence, const MaterialDb& db) {
    if (stack.layers.empty()) throw InputError("stack has no layers");
    if (grid_nm.empty()) throw InputError("wavelength grid is empty");

    std::vector<int> ids;
    std::vector<double> thicknesses;
    for (const auto& l : stack.layers) {
        ids.push_back(l.material_id);
        thicknesses.push_back(l.thickness_nm);
    }
    StackEvaluator eval(stack.incident, ids, stack.substrate,
                        std::vector<double>(grid_nm.begin(), grid_nm.end()), incidence, db);
    return eval.evaluate(thicknesses);
}

double merit(std::span<const Spectrum> spectra, const TargetSpectrum& target) {
    target.validate();
    if (spectra.empty()) throw InputError("no spectra given");
    double total = 0.0;
    for (const auto& s : spectra) {
        check_same_grid(s.wavelengths_nm, target.wavelengths_nm);
        const auto comp = s.component(target.component);
        double sum = 0.0;
        for (std::size_t i = 0; i < comp.size(); ++i) {
            const double d = comp[i] - target.target[i];
            sum += d * d;
        }
        total += sum;
    }
    return total / static_cast<double>(spectra.size());
}

double merit(const Spectrum& spectrum, const TargetSpectrum& target) {
    return merit(std::span<const Spectrum>(&spectrum, 1), target);
}

double observation_error(std::span<const Spectrum> spectra, const TargetSpectrum& target) {
    target.validate();
    if (spectra.empty()) throw InputError("no spectra given");
    double total = 0.0;
    for (const auto& s : spectra) {
        check_same_grid(s.wavelengths_nm, target.wavelengths_nm);
        const auto comp = s.component(target.component);
        for (std::size_t i = 0; i < comp.size(); ++i)
            total += target.weights[i] * std::abs(comp[i] - target.target[i]);
    }
    return total;
}

double band_average(const Spectrum& s, double lo_nm, double hi_nm, SpectrumComponent c) {
    const auto comp = s.component(c);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.wavelengths_nm.size(); ++i) {
        if (s.wavelengths_nm[i] >= lo_nm && s.wavelengths_nm[i] <= hi_nm) {
            sum += comp[i];
            ++count;
        }
    }
    if (count == 0) throw InputError("band [" + fmt(lo_nm) + ", " + fmt(hi_nm) +
                                     "] nm contains no grid points");
    return sum / static_cast<double>(count);
}

void write_spectra_csv(const std::filesystem::path& path, std::span<const Spectrum> spectra) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << "lambda_nm,angle_deg,A,R,T\n";
    for (const auto& s : spectra) {
        for (std::size_t i = 0; i < s.wavelengths_nm.size(); ++i) {
            out << fmt(s.wavelengths_nm[i]) << ',' << fmt(s.angle_deg) << ','
                << fmt(s.absorption[i]) << ',' << fmt(s.reflection[i]) << ','
                << fmt(s.transmission[i]) << '\n';
        }
    }
}

StackEvaluator::StackEvaluator(MediumSpec incident, std::vector<int> material_ids,
                               MediumSpec substrate, std::vector<double> grid_nm,
                               IncidenceSpec incidence, const MaterialDb& db)
    : grid_(std::move(grid_nm)), incidence_(std::move(incidence)) {
    if (material_ids.empty()) throw InputError("stack has no layers");
    if (grid_.empty()) throw InputError("wavelength grid is empty");

    incident_nk_.reserve(grid_.size());
    substrate_nk_.reserve(grid_.size());
    for (double w : grid_) {
        incident_nk_.push_back(incident.index_at(w, db));
        substrate_nk_.push_back(substrate.index_at(w, db));
    }
    layer_nk_.reserve(material_ids.size());
    for (int id : material_ids) {
        const auto& rec = db.record(id);
        std::vector<std::complex<double>> nk;
        nk.reserve(grid_.size());
        for (double w : grid_) nk.push_back(rec.refractive_index(w));
        layer_nk_.push_back(std::move(nk));
    }
}

std::vector<Spectrum> StackEvaluator::evaluate(std::span<const double> thicknesses_nm) const {
    if (thicknesses_nm.size() != layer_nk_.size())
        throw InputError("thickness count " + std::to_string(thicknesses_nm.size()) +
                         " does not match layer count " + std::to_string(layer_nk_.size()));
    return solve_spectra(incident_nk_, layer_nk_, thicknesses_nm, substrate_nk_, grid_,
                         incidence_);
}

} // namespace thinopt
