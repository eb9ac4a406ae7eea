// Worked SU(2), SO(3), bipartite and torus models with their reference
// solutions, shared by the command-line tool and the acceptance suite.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nmzkit/algebra.hpp"
#include "nmzkit/nmz.hpp"
#include "nmzkit/quantum.hpp"

namespace nmzkit::demos {

// ---- models ----

// H = lambda * (0.48 sx + 0.6 sy + 0.64 sz), so det H = -lambda^2.
MatrixC su2_hamiltonian(double lambda);

struct Su2Model {
  double lambda = 1.0;
  MatrixC H;
  algebra::Generator generator;   // A = -iH
  algebra::BasisPtr obs_basis;    // {g, Lg}
  algebra::OperatorRep L, P;
  algebra::BasisPtr state_basis;  // {1, rho0 = 4g^2, 4 g L*g, 4 (L*g)^2}, L* driven by +iH
  algebra::OperatorRep Lstar, Pstar;
};

Su2Model su2_model(double lambda);

struct So3Model {
  double x = 2.0 / 7, y = 3.0 / 7, z = 6.0 / 7, r = 1.0;
  MatrixC X;
  algebra::BasisPtr obs_basis;  // {g, Lg, L^2 g}
  algebra::OperatorRep L, P;
  // {1, g, g^2, Lg, L^2g, g Lg, g L^2g, (Lg)^2, Lg L^2g, (L^2g)^2} with the
  // state generator X' (X by default, as written for the state picture).
  algebra::BasisPtr state_basis;
  algebra::OperatorRep Lstar, Pstar;
};

So3Model so3_model(double x, double y, double z, bool negateStateGenerator = false);

// Matrix representations as published, column convention.
MatrixC published_su2_Lstar(double lambda);
MatrixC published_su2_Pstar(double lambda);
MatrixC published_so3_Lstar(double r);
MatrixC published_so3_Pstar(double r);

// SO(3) closed forms over {1, g, g^2} for rho0 = Tr(O)^2.
VectorC so3_state_oracle(const MatrixC& stateGenerator, double t);  // Weingarten route
VectorC so3_state_trig(double r, double t);                         // trigonometric form
VectorC so3_state_published(double r, double t);                    // printed closed form

// ---- outcomes ----

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool upper = true;  // value <= tolerance when true, value >= tolerance otherwise
  bool passed = false;
};

struct Reference {
  std::string name;
  std::string formula;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct DemoOutcome {
  std::string demo;
  std::vector<std::pair<std::string, double>> parameters;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<Reference> references;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<cplx> spectrum;
  std::optional<nmz::GLESolution> solution;
  Table table;

  bool passed() const;
  void check(std::string name, double value, double tolerance, bool upper = true);
};

Table solution_table(const nmz::GLESolution& s);

struct DemoParams {
  std::optional<double> dt;  // per-demo default when unset
  std::optional<double> tMax;
  double lambda = 1.0;
  double so3x = 2.0 / 7, so3y = 3.0 / 7, so3z = 6.0 / 7;
  double omega = 1.0, gamma = 0.3;
  double rhoBp0 = 0.7;  // population of |0> in rhoB
  int torusN = 100, torusGrid = 4096;
  double tolerance = 1e-6;
  std::uint64_t seed = 42;
};

double default_dt(const std::string& demo);
double default_tmax(const std::string& demo);
const std::vector<std::string>& demo_names();

DemoOutcome run_su2_observable(const DemoParams& p);
DemoOutcome run_su2_state(const DemoParams& p);
DemoOutcome run_so3_observable(const DemoParams& p);
DemoOutcome run_so3_state(const DemoParams& p);
DemoOutcome run_quantum_bipartite(const DemoParams& p);
DemoOutcome run_torus_qnorm(const DemoParams& p);
DemoOutcome run_demo(const std::string& name, const DemoParams& p);

quantum::BipartiteSystem two_qubit_system(double omega, double gamma, double rhoBp0);
MatrixC default_sigma0();

}  // namespace nmzkit::demos
