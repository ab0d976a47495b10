"""Rephasing efficiencies for spin echo and light storage."""
from .closed_forms import (EXACT_POLYNOMIALS, TABLE_POLYNOMIALS, eit_closed_form, eit_cpmg,
                           eit_cpmg_repeated, eit_double_cpmg, eit_triple, table_polynomial)
from .core import (EfficiencyResult, atoms, averaged_coherence, coherence_map, ensemble_gates,
                   fixed_error_pulse, fixed_error_sequence, grid_epsilon, initial_state, phase_grid,
                   resolve_dephase)
from .light_storage import (CoherenceField, coherence_ratios, eit_bruteforce, eit_efficiency_general,
                            eit_efficiency_phase_averaged, eit_hahn_analytic, eit_phase_averaged_bruteforce,
                            eit_write, field_profile_after, gaussian_envelope)
from .spin_echo import (cpmg_spin_lock_limit, spin_echo_bruteforce, spin_echo_cpmg_analytic,
                        spin_echo_cpmg_repeated_asymptotic, spin_echo_hahn_analytic, spin_echo_sweep,
                        write_phase_to_xi)
