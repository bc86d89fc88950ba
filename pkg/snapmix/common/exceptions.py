#-------------------------------------------------------------------------------
# snapmix: common/exceptions.py
#
# Exception hierarchy for the snapmix library
#-------------------------------------------------------------------------------
class SnapmixError(Exception):
    pass

class InputError(SnapmixError):
    pass

class ConfigError(SnapmixError):
    pass

class DegenerateMixtureError(SnapmixError):
    pass

class MatchingError(SnapmixError):
    pass

class RootFindingError(SnapmixError):
    pass

class LPError(SnapmixError):
    pass

class LPInfeasibleError(LPError):
    pass

class LPUnboundedError(LPError):
    pass
