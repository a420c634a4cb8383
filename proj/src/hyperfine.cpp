#include "qdn/hyperfine.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qdn/constants.hpp"
#include "qdn/parallel.hpp"
#include "qdn/rng.hpp"

namespace qdn {

namespace {
constexpr double pi = std::numbers::pi;

void validate_geometry_inputs(double height_m, double density) {
  if (!(height_m > 0.0) || !(density > 0.0))
    throw std::invalid_argument("DotGeometry: height and density must be positive");
}
}  // namespace

DotGeometry DotGeometry::from_radius(double radius_m, double height_m,
                                     double atomic_density_per_m3) {
  if (!(radius_m > 0.0)) throw std::invalid_argument("DotGeometry: radius must be positive");
  validate_geometry_inputs(height_m, atomic_density_per_m3);
  DotGeometry g;
  g.radius_m = radius_m;
  g.height_m = height_m;
  g.atomic_density_per_m3 = atomic_density_per_m3;
  g.n_atoms = std::round(atomic_density_per_m3 * pi * radius_m * radius_m * height_m);
  return g;
}

DotGeometry DotGeometry::from_atom_count(double n_atoms, double height_m,
                                         double atomic_density_per_m3) {
  if (!(n_atoms >= 1.0)) throw std::invalid_argument("DotGeometry: need at least one atom");
  validate_geometry_inputs(height_m, atomic_density_per_m3);
  const double radius =
      std::sqrt(n_atoms / (atomic_density_per_m3 * pi * height_m));
  return from_radius(radius, height_m, atomic_density_per_m3);
}

nlohmann::json DotGeometry::to_json() const {
  return {{"orbital_splitting_ev", orbital_splitting_ev},
          {"effective_mass_ratio", effective_mass_ratio},
          {"radius_m", radius_m},
          {"height_m", height_m},
          {"atomic_density_per_m3", atomic_density_per_m3},
          {"n_atoms", n_atoms}};
}

DotGeometry DotGeometry::from_json(const nlohmann::json& j) {
  if (j.contains("n_atoms") && !j.contains("radius_m"))
    return from_atom_count(j.at("n_atoms").get<double>(), j.at("height_m").get<double>(),
                           j.at("atomic_density_per_m3").get<double>());
  auto g = from_radius(j.at("radius_m").get<double>(), j.at("height_m").get<double>(),
                       j.at("atomic_density_per_m3").get<double>());
  g.orbital_splitting_ev = j.value("orbital_splitting_ev", 0.0);
  g.effective_mass_ratio = j.value("effective_mass_ratio", 0.0);
  return g;
}

DotGeometry geometry_from_splitting(double orbital_splitting_ev,
                                    double effective_mass_ratio, double height_m,
                                    double atomic_density_per_m3) {
  if (!(orbital_splitting_ev > 0.0) || !(effective_mass_ratio > 0.0))
    throw std::invalid_argument("geometry_from_splitting: inputs must be positive");
  const double energy_j = orbital_splitting_ev * constants::electron_volt;
  const double mass = effective_mass_ratio * constants::electron_mass;
  // sqrt(hbar/(m omega)) with omega = E/hbar.
  const double radius = constants::hbar / std::sqrt(mass * energy_j);
  auto g = DotGeometry::from_radius(radius, height_m, atomic_density_per_m3);
  g.orbital_splitting_ev = orbital_splitting_ev;
  g.effective_mass_ratio = effective_mass_ratio;
  return g;
}

void BathSpecies::validate() const {
  if (!(spinful_fraction >= 0.0) || !(spinful_fraction <= 1.0))
    throw std::invalid_argument("BathSpecies: spinful fraction outside [0, 1]");
  if (!(wavefunction_fraction >= 0.0) || !(wavefunction_fraction <= 1.0))
    throw std::invalid_argument("BathSpecies: wavefunction fraction outside [0, 1]");
  if (!(coupling_ev > 0.0))
    throw std::invalid_argument("BathSpecies: coupling must be positive");
  const double twice = 2.0 * spin;
  if (!(twice >= 1.0) || std::abs(twice - std::round(twice)) > 1e-9)
    throw std::invalid_argument("BathSpecies: 2I must be a positive integer");
}

nlohmann::json BathSpecies::to_json() const {
  return {{"label", label},
          {"spinful_fraction", spinful_fraction},
          {"wavefunction_fraction", wavefunction_fraction},
          {"coupling_ev", coupling_ev},
          {"spin", spin}};
}

BathSpecies BathSpecies::from_json(const nlohmann::json& j) {
  BathSpecies s;
  s.label = j.at("label").get<std::string>();
  s.spinful_fraction = j.at("spinful_fraction").get<double>();
  s.wavefunction_fraction = j.at("wavefunction_fraction").get<double>();
  s.coupling_ev = j.at("coupling_ev").get<double>();
  s.spin = j.at("spin").get<double>();
  s.validate();
  return s;
}

double count_spinful(const BathSpecies& species, const DotGeometry& geometry) {
  species.validate();
  return species.spinful_fraction * species.wavefunction_fraction * geometry.n_atoms;
}

double ergodic_t2star(const BathSpecies& species, const DotGeometry& geometry) {
  species.validate();
  const double p_gamma = species.spinful_fraction * species.wavefunction_fraction;
  if (p_gamma <= 0.0) {
    std::cerr << "ergodic_t2star: " << species.label
              << " has no spinful overlap, dephasing time is infinite\n";
    return std::numeric_limits<double>::infinity();
  }
  const double n_s = count_spinful(species, geometry);
  if (n_s < 1.0)
    std::cerr << "ergodic_t2star: " << species.label << " has N_S = " << n_s
              << " < 1, the ergodic closed form is a coarse estimate\n";
  const double spin_term = std::sqrt(2.0 * species.spin * (species.spin + 1.0));
  return constants::hbar_ev_s * std::sqrt(3.0 * n_s) /
         (p_gamma * species.coupling_ev * spin_term);
}

double overhauser_mc_oracle(const BathSpecies& species, const DotGeometry& geometry,
                            int n_trials, std::uint64_t seed, int threads) {
  species.validate();
  if (n_trials < 1000)
    throw std::invalid_argument("overhauser_mc_oracle: need at least 1e3 trials");

  const long n_sites =
      std::lround(geometry.n_atoms * species.wavefunction_fraction);
  const long n_levels = std::lround(2.0 * species.spin) + 1;
  // Effective per-site detuning. The closed form above counts each nucleus
  // with weight 2A/N_A; using A/N_A here would land exactly a factor 2 high.
  const double shift_per_m =
      2.0 * species.coupling_ev * constants::electron_volt /
      (constants::planck_h * geometry.n_atoms);

  std::vector<double> shifts(static_cast<std::size_t>(n_trials));
  parallel_for(static_cast<std::size_t>(n_trials), threads, [&](std::size_t t) {
    Rng rng = Rng::stream(seed, t);
    const long k = rng.binomial(n_sites, species.spinful_fraction);
    double total = 0.0;
    for (long i = 0; i < k; ++i) {
      const double m = -species.spin +
                       static_cast<double>(rng.uniform_index(
                           static_cast<std::uint64_t>(n_levels)));
      total += shift_per_m * m;
    }
    shifts[t] = total;
  });

  double mean = 0.0;
  for (double s : shifts) mean += s;
  mean /= n_trials;
  double var = 0.0;
  for (double s : shifts) var += (s - mean) * (s - mean);
  var /= (n_trials - 1);
  const double sigma_f = std::sqrt(var);
  if (!(sigma_f > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / (std::sqrt(2.0) * pi * sigma_f);
}

double combine_baths(std::span<const double> t2star_list_s) {
  if (t2star_list_s.empty()) throw std::invalid_argument("combine_baths: empty list");
  double inv_sq = 0.0;
  for (double t : t2star_list_s) {
    if (!(t > 0.0)) throw std::invalid_argument("combine_baths: times must be positive");
    if (std::isinf(t)) continue;
    inv_sq += 1.0 / (t * t);
  }
  return inv_sq > 0.0 ? 1.0 / std::sqrt(inv_sq)
                      : std::numeric_limits<double>::infinity();
}

std::vector<BathSpecies> default_bath_species(double gamma_barrier,
                                              double well_spinful_ppm) {
  const double a_si = 2.15e-6;  // eV
  const double a_ge = 10.0 * a_si;
  return {
      {"si29-well", well_spinful_ppm * 1e-6, 1.0 - gamma_barrier, a_si, 0.5},
      {"si29-barrier", 0.0467 * 0.7, gamma_barrier, a_si, 0.5},
      {"ge73-barrier", 0.0776 * 0.3, gamma_barrier, a_ge, 4.5},
  };
}

DotGeometry default_dot_geometry() {
  return DotGeometry::from_atom_count(1.6e5, 6e-9, 5.0e28);
}

}  // namespace qdn
