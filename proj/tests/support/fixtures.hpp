#pragma once

// Golden problem fixtures exercised by both the unit and acceptance suites:
// a single-question astrophysics problem that must pass every structural
// check, and a multi-part chemistry problem that the structure check must
// flag.

#include <string>

namespace sharp::testing {

inline const std::string kSupernovaQuestion =
    "A core-collapse supernova at a distance of 1 kiloparsec ($3.086 \\times "
    "10^{19}$ meters) releases $3 \\times 10^{46}$ J of energy, with 99\\% of "
    "this energy emitted as neutrinos. Each neutrino has an average energy of "
    "10 MeV ($1.6 \\times 10^{-12}$ J). A spherical lead detector with a "
    "radius of 10 meters is used to observe these neutrinos. Lead has a "
    "density of 11,340 kg/m$^3$ and an atomic mass of 207.2 g/mol. The "
    "neutrino-nucleus interaction cross section is $1 \\times 10^{-43}$ "
    "cm$^2$ per nucleus. Assuming neutrinos are emitted isotropically and all "
    "physical quantities are uniform, calculate the total number of neutrino "
    "interactions in the detector. **Constants and Formulas:** - Avogadro's "
    "number: $N_A = 6.022 \\times 10^{23} \\, \\text{mol}^{-1}$ - Sphere "
    "volume: $V = \\frac{4}{3} \\pi r^3$ - Neutrino flux at Earth: $\\Phi = "
    "\\frac{N_\\nu}{4 \\pi d^2}$ - Interaction rate: $N_{\\text{interactions}} "
    "= \\Phi \\cdot \\sigma \\cdot N_{\\text{nuclei}}$";

inline const std::string kSupernovaAnswer = "2140";

inline const std::string kZincQuestion =
    "An impure sample of zinc carbonate ($ZnCO_3$) undergoes thermal "
    "decomposition, releasing carbon dioxide gas. The mass loss due to $CO_2$ "
    "emission is measured as 2.64 g. The resulting zinc oxide (ZnO) is then "
    "reduced using excess carbon, producing 5.89 g of zinc metal. 1. Write "
    "the balanced equation for the decomposition of $ZnCO_3$. 2. Write the "
    "balanced equation for the carbon reduction of ZnO. 3. Determine the "
    "percentage purity of zinc in the original impure sample. Assume all "
    "reactions proceed to completion, and impurities do not participate in "
    "any reactions. (Atomic masses: Zn = 65.38 g/mol, C = 12.01 g/mol, O = "
    "16.00 g/mol)";

inline const std::string kZincAnswer = "58.9\\%";

inline const std::string kVirionAnswer = "3586";

}  // namespace sharp::testing
