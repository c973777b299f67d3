class SymradError(Exception):
    """Base class for simulator errors."""


class ConfigError(SymradError):
    """An experiment configuration violates an invariant."""

    def __init__(self, key, message):
        self.key = key
        self.message = message
        super().__init__(f"{key}: {message}")


class DegenerateBeamformerError(SymradError, ValueError):
    """A beamformer could not be normalized (zero or antiparallel input)."""

    def __init__(self, message, ap_index=None):
        self.ap_index = ap_index
        if ap_index is not None:
            message = f"AP {ap_index}: {message}"
        super().__init__(message)


class TrialError(SymradError):
    def __init__(self, trial_index, rho, cause):
        self.trial_index = trial_index
        self.rho = rho
        self.cause = cause
        super().__init__(f"trial {trial_index} failed at rho={rho}: {cause}")


class CampaignError(SymradError):
    """One or more trials of a campaign failed; the campaign is discarded."""

    def __init__(self, failures):
        self.failures = list(failures)
        summary = '; '.join(self.failures[:5])
        if len(self.failures) > 5:
            summary += f" (+{len(self.failures) - 5} more)"
        super().__init__(f"{len(self.failures)} trial(s) failed: {summary}")


class AntiparallelBeamformerError(DegenerateBeamformerError):
    """The weighted combination of the two MRT directions cancelled out."""
