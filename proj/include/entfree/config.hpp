#pragma once

// Scenario configuration: INI text with [scenario], [finite], [continuum] and
// [checks] sections. Parsing validates every field and rejects unknown keys,
// so a config that loads cleanly can be run without further checks.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entfree/continuum.hpp"
#include "entfree/numerics.hpp"

namespace entfree {

enum class Mode { finite, continuum, verify };

enum class HamiltonianKind { sigma_zz, zero, random, random_factorisable, file };
enum class InitialStateKind { plus_plus, basis, random_product, random };
enum class Engine { exact, hartree, classical };

struct FiniteConfig {
    Index dim_a = 2;
    Index dim_b = 2;
    HamiltonianKind hamiltonian = HamiltonianKind::sigma_zz;
    std::string hamiltonian_file;
    double hamiltonian_scale = 1.0;
    int segments = 1;
    InitialStateKind initial_state = InitialStateKind::plus_plus;
    std::vector<double> rate_dts; // empty: no rate check
    bool track_mean_field = true;
};

struct PacketConfig {
    double x0 = 0.0;
    double p0 = 0.0;
    double width = 1.0;
};

struct ContinuumConfig {
    Engine engine = Engine::exact;
    Index n_a = 256;
    double dx_a = 0.1;
    Index n_b = 256;
    double dx_b = 0.1;
    double mass_a = 1.0;
    double mass_b = 1.0;
    PacketConfig packet_a;
    PacketConfig packet_b;
    continuum::PotentialSpec potential;
    double mask_width = 0.0;
    double mask_exponent = 0.125;
    int sample_every = 10;
};

// Thresholds; unset ones are not checked.
struct ChecksConfig {
    std::optional<double> min_purity;
    std::optional<double> curvature_expected;
    double curvature_tolerance = 1e-3;
    double rate_relative_tolerance = 1e-4;
    std::optional<double> max_norm_drift;
    std::optional<double> max_energy_drift;
    std::optional<double> max_final_entropy;
    std::optional<double> min_final_entropy;
    double max_classical_deviation_dx = 2.0;
};

struct ScenarioConfig {
    std::string id;
    Mode mode = Mode::finite;
    std::uint64_t seed = 0;
    double hbar = 1.0;
    double dt = 0.0;
    double t_final = 0.0;
    std::string output_dir = "output";
    std::string filter; // verify mode
    FiniteConfig finite;
    ContinuumConfig continuum;
    ChecksConfig checks;
};

// `source` names the text in error messages. Throws ConfigError.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);

// Dense matrix text: one row per line, 2 * cols numbers per row given as
// (re, im) pairs; '#' starts a comment.
// Malformed text or unreadable files throw IoError.
ComplexMatrix parse_matrix(const std::string& text, const std::string& source = "<matrix>");
ComplexMatrix load_matrix(const std::string& path);

std::string to_string(Mode mode);
std::string to_string(Engine engine);

}  // namespace entfree
