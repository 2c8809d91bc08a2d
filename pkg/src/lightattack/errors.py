"""Exception taxonomy shared across the package."""


class LightattackError(Exception):
    """Base class for all package-specific errors."""


class SceneFormatError(LightattackError):
    """A scene file is missing fields or violates the documented schema."""


class ConfigError(LightattackError):
    """Invalid experiment configuration (bad paths, mismatched ids, bad values)."""


class AgentProtocolError(LightattackError):
    """An agent was driven outside its contract (e.g. acting after STOP)."""


class AsrUndefinedError(LightattackError):
    """ASR has no value because the clean condition produced no successes."""


class BridgeError(LightattackError):
    """Base class for external-agent bridge failures."""


class BridgeTimeoutError(BridgeError):
    """The external agent did not answer within the configured timeout."""


class BridgeProtocolError(BridgeError):
    """Malformed, out-of-order, or otherwise invalid bridge traffic."""


class BridgeVersionError(BridgeError):
    """The external agent speaks an incompatible protocol version."""
