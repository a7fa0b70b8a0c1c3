"""Desk-scale model of Rabi cycling and photoionization in intense
short-wavelength fields: closed-form Autler-Townes spectra, detuning
scans, focal-volume averaging, an essential-states propagation check and
blind Richardson-Lucy deconvolution."""

__version__ = "0.1.0"

from .amplitudes import (ChannelAmplitudeSet, TwoPhotonOptions,
                         UnsupportedEnvelopeError, amplitude_ratio,
                         channel_amplitudes, one_photon_amplitude,
                         single_atom_spectrum, two_photon_amplitude)
from .deconv import (DeconvolutionConfig, DeconvolutionResult,
                     convolve_gaussian, gaussian_kernel, kernel_fwhm,
                     richardson_lucy, richardson_lucy_blind)
from .focal import (BeamGeometry, IntensityCache, VolumeAverageResult,
                    beam_intensity, volume_averaged_spectrum)
from .model import (ATOM_PRESETS, PARTIAL_WAVES, AtomModel, Envelope,
                    PulseParams, Spectrum, SpectrumGrid, flat_top_pulse,
                    helium_cis, helium_experimental)
from .oracle import (EssentialStatesSystem, Intermediate, PropagationResult,
                     StepSizeError, build_system, oracle_spectrum, propagate)
from .rabi import (RabiAmplitudes, RabiParams, dressed_energies,
                   dressed_kinetic_energies, excited_population,
                   rabi_amplitudes)
from .scans import (DoubletAnalysis, ScanResult2D, analyze_doublet,
                    analyze_intensity, branch_gap_curve, branch_positions,
                    buildup_sequence, central_dip_present, detuning_scan,
                    find_symmetric_detuning, min_branch_gap)
from .units import (CONST, PhysicalConstants, au_to_ev, au_to_fs,
                    convert_energy, ev_to_au, field_from_intensity,
                    fs_to_au, intensity_from_field, mev_to_au)
