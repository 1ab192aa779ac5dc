#pragma once

#include <numbers>

namespace nanofock::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018, exact where the SI defines them.
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double boltzmann = 1.380649e-23;     // J/K
inline constexpr double speed_of_light = 299792458.0; // m/s
inline constexpr double epsilon0 = 8.8541878128e-12;  // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

/// Polarizability per unit length quoted as multiples of 4*pi*eps0*Angstrom^2, in F*m.
inline constexpr double polarizability_unit_4pi_eps0_A2 = 4.0 * pi * epsilon0 * 1e-20;

// Graphene lattice: lattice constant and areal mass density of a carbon sheet.
inline constexpr double graphene_lattice_constant = 0.246e-9;  // m
inline constexpr double carbon_mass = 12.011 * atomic_mass_unit;

}  // namespace nanofock::constants
