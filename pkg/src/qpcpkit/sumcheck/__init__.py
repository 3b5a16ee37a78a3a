from .engine import (RoundContraction, dense_nested_trace, honest_response, m_matrix,
                     nested_product_value, power_value, product_vector, stage_operator)
from .fixedpoint import ChallengeState, sample_challenge, tolerance
from .naive import (DiagonalOracle, HonestTree, NaiveTreeCheat, naive_tree_protocol,
                    single_spike_diagonal)
from .protocol import (Honest, Perturb, Prover, ProtocolParams, SwitchTruthful, Transcript,
                       Verdict, Verifier, nested_power_protocol, run_in_process,
                       run_trace_protocol, true_trace)
from .stats import soundness_monte_carlo, trial_seeds, wilson_interval
from .transport import VerifierServer, connect_prover, serve_verifier
