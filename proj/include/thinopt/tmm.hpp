#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "thinopt/material_db.hpp"

namespace thinopt {

/* Characteristic-matrix formulation, in free-space-admittance units.
 *
 * For layer j with complex index N_j, thickness d_j, at vacuum wavelength
 * lambda and propagation angle theta_j (complex Snell against the incident
 * medium):
 *
 *   delta_j = 2 pi N_j d_j cos(theta_j) / lambda
 *   eta_j   = N_j cos(theta_j)      (s-pol)
 *           = N_j / cos(theta_j)    (p-pol)
 *
 *   M_j = [ cos(delta_j)            i sin(delta_j) / eta_j ]
 *         [ i eta_j sin(delta_j)    cos(delta_j)           ]
 *
 * The stack matrix M = M_1 * ... * M_L (topmost layer first) maps the
 * substrate admittance into tangential field amplitudes [B; C] = M [1; eta_s].
 * Then
 *   r = (eta_0 B - C) / (eta_0 B + C),      R = |r|^2
 *   t = 2 eta_0 / (eta_0 B + C),            T = Re(eta_s) |t|^2 / eta_0
 *   A = 1 - R - T
 * with eta_0 the (real) admittance of the transparent incident medium.
 *
 * Sign convention: material data stores N = n + ik with k >= 0, but the
 * matrix above belongs to the exp(+i w t) time convention, where absorption
 * means N = n - ik. The solver therefore evaluates delta_j and eta_j with
 * the conjugated index (n - ik); for lossless media the two conventions are
 * identical, and R/T/A are convention-independent. Feeding the matrix n + ik
 * directly would make absorbing layers amplify and drive R past 1.
 * cos(theta_j) takes the branch with Im(N_j cos(theta_j)) <= 0 (decay into
 * absorbing media, in the conjugated convention); total internal reflection
 * comes out as a complex angle, not an error.
 */

enum class Polarization { S, P, Unpolarized };

enum class SpectrumComponent { Absorption, Reflection, Transmission };

struct Mat2c {
    std::complex<double> m00{1.0}, m01{0.0}, m10{0.0}, m11{1.0};

    Mat2c operator*(const Mat2c& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
};

// Incident medium or substrate: either a catalog material or a fixed index.
struct MediumSpec {
    std::optional<int> material_id;
    std::complex<double> fixed_nk{1.0, 0.0};

    static MediumSpec vacuum() { return {}; }
    static MediumSpec fixed(std::complex<double> nk) { return {std::nullopt, nk}; }
    static MediumSpec material(int id) { return {id, {1.0, 0.0}}; }

    std::complex<double> index_at(double lambda_nm, const MaterialDb& db) const {
        return material_id ? db.record(*material_id).refractive_index(lambda_nm) : fixed_nk;
    }
};

struct Layer {
    int material_id = -1;
    double thickness_nm = 0.0; // must be > 0 and finite
};

// Ordered multilayer. layers[0] is topmost (light-incident side); the
// substrate is semi-infinite.
struct Stack {
    MediumSpec incident = MediumSpec::vacuum();
    std::vector<Layer> layers;
    MediumSpec substrate = MediumSpec::vacuum();
};

// Per-wavelength A/R/T at one incidence angle. A + R + T = 1 within 1e-9.
struct Spectrum {
    std::vector<double> wavelengths_nm;
    double angle_deg = 0.0;
    std::vector<double> absorption;
    std::vector<double> reflection;
    std::vector<double> transmission;

    std::span<const double> component(SpectrumComponent c) const {
        switch (c) {
            case SpectrumComponent::Reflection: return reflection;
            case SpectrumComponent::Transmission: return transmission;
            default: return absorption;
        }
    }
};

// Target values for one spectrum component (absorption unless stated
// otherwise) plus the per-wavelength weights W(lambda) used by
// observation_error.
struct TargetSpectrum {
    std::vector<double> wavelengths_nm;
    std::vector<double> target;  // in [0,1]
    std::vector<double> weights; // non-negative, not all zero
    SpectrumComponent component = SpectrumComponent::Absorption;

    void validate() const;

    // Uniform grid with piecewise-constant target bands and unit weights.
    struct Band {
        double from_nm, to_nm, value;
    };
    static TargetSpectrum from_bands(std::span<const double> grid,
                                     std::span<const Band> bands,
                                     double default_value = 0.0,
                                     SpectrumComponent component = SpectrumComponent::Absorption);
};

struct IncidenceSpec {
    std::vector<double> angles_deg{0.0}; // from the incident-medium normal, each in [0, 90)
    Polarization polarization = Polarization::Unpolarized;
};

// Single-layer characteristic matrix M_j above. `pol` must be S or P.
Mat2c characteristic_matrix(std::complex<double> nk, double thickness_nm, double lambda_nm,
                            double theta_deg, Polarization pol,
                            std::complex<double> incident_nk = {1.0, 0.0});

// Full solve: one Spectrum per angle in `incidence`, unpolarized = mean of
// S and P powers.
std::vector<Spectrum> compute_spectra(const Stack& stack, std::span<const double> grid_nm,
                                      const IncidenceSpec& incidence, const MaterialDb& db);

// Sum over the grid of (component - target)^2, averaged over angles.
// Zero iff exact match. Throws InputError on grid mismatch.
double merit(std::span<const Spectrum> spectra, const TargetSpectrum& target);
double merit(const Spectrum& spectrum, const TargetSpectrum& target);

// Weighted L1 deviation summed over all (lambda, angle) pairs:
// sum_{lambda,theta} W(lambda) |S - S*|.
double observation_error(std::span<const Spectrum> spectra, const TargetSpectrum& target);

// Mean of a spectrum component over grid points with lo <= lambda <= hi.
double band_average(const Spectrum& s, double lo_nm, double hi_nm,
                    SpectrumComponent c = SpectrumComponent::Absorption);

// CSV export, header "lambda_nm,angle_deg,A,R,T".
void write_spectra_csv(const std::filesystem::path& path, std::span<const Spectrum> spectra);

// Fixed materials + grid + incidence with prefetched refractive indices;
// evaluate() only varies thicknesses. This is the GA's inner loop.
class StackEvaluator {
public:
    StackEvaluator(MediumSpec incident, std::vector<int> material_ids, MediumSpec substrate,
                   std::vector<double> grid_nm, IncidenceSpec incidence, const MaterialDb& db);

    std::vector<Spectrum> evaluate(std::span<const double> thicknesses_nm) const;

    std::size_t layer_count() const { return layer_nk_.size(); }
    std::span<const double> grid() const { return grid_; }

private:
    std::vector<double> grid_;
    IncidenceSpec incidence_;
    std::vector<std::complex<double>> incident_nk_;             // per grid point
    std::vector<std::complex<double>> substrate_nk_;            // per grid point
    std::vector<std::vector<std::complex<double>>> layer_nk_;   // per layer, per grid point
};

} // namespace thinopt
