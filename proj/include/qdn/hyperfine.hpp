#ifndef QDN_HYPERFINE_HPP
#define QDN_HYPERFINE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace qdn {

/// Cylinder approximation of the dot volume. n_atoms is the rounded atom
/// count of the cylinder at the stored density.
struct DotGeometry {
  double orbital_splitting_ev = 0.0;  // 0 when built from an explicit radius
  double effective_mass_ratio = 0.0;
  double radius_m = 0.0;
  double height_m = 0.0;
  double atomic_density_per_m3 = 0.0;
  double n_atoms = 0.0;

  static DotGeometry from_radius(double radius_m, double height_m,
                                 double atomic_density_per_m3);
  /// Radius chosen so the cylinder holds exactly n_atoms at the density.
  static DotGeometry from_atom_count(double n_atoms, double height_m,
                                     double atomic_density_per_m3);

  nlohmann::json to_json() const;
  static DotGeometry from_json(const nlohmann::json& j);
};

/// Dot size from a harmonic confinement energy: the oscillator length
/// sqrt(hbar / (m* omega)) with hbar*omega = orbital_splitting.
DotGeometry geometry_from_splitting(double orbital_splitting_ev,
                                    double effective_mass_ratio, double height_m,
                                    double atomic_density_per_m3);

/// One nuclear species of the bath. spinful_fraction is the abundance of the
/// spin-carrying isotope within the region, wavefunction_fraction the share
/// of the electron density in that region.
struct BathSpecies {
  std::string label;
  double spinful_fraction = 0.0;       // p
  double wavefunction_fraction = 0.0;  // gamma
  double coupling_ev = 0.0;            // per-nucleus contact coupling A
  double spin = 0.5;                   // I, half-integer

  void validate() const;
  nlohmann::json to_json() const;
  static BathSpecies from_json(const nlohmann::json& j);
};

/// Expected number of spin-carrying nuclei the electron overlaps:
/// p * gamma * n_atoms.
double count_spinful(const BathSpecies& species, const DotGeometry& geometry);

/// Ergodic-limit dephasing time of one species,
/// hbar sqrt(3 N_S) / (p gamma A sqrt(2 I (I+1))). Returns +inf (with a
/// warning) when p*gamma vanishes.
double ergodic_t2star(const BathSpecies& species, const DotGeometry& geometry);

/// Monte-Carlo check of the closed form: draws the spinful-site count
/// Binomial(round(n_atoms*gamma), p) and random spin projections per site,
/// accumulates the total frequency shift, and converts the shift spread into
/// a dephasing time via T2* = 1/(sqrt(2) pi sigma_f).
double overhauser_mc_oracle(const BathSpecies& species, const DotGeometry& geometry,
                            int n_trials, std::uint64_t seed, int threads = 1);

/// Independent Gaussian baths combine inversely in quadrature:
/// (sum T_i^-2)^(-1/2).
double combine_baths(std::span<const double> t2star_list_s);

/// Named defaults: natural-abundance species for a purified well
/// (60 ppm spinful) with natural-composition barriers at barrier overlap
/// gamma_b, and the reference cylinder (1.6e5 atoms, 6 nm height).
std::vector<BathSpecies> default_bath_species(double gamma_barrier = 1e-3,
                                              double well_spinful_ppm = 60.0);
DotGeometry default_dot_geometry();

}  // namespace qdn

#endif
