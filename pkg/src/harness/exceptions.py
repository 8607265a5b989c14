"""
Custom exceptions for the experiment harness.
"""


class HarnessError(Exception):
    """Base harness exception"""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.message = message
        self.payload = payload

    def __str__(self):
        return self.message

    def to_dict(self):
        rv = dict(self.payload or ())
        rv['message'] = self.message
        rv['error'] = self.__class__.__name__
        return rv


class ExperimentConfigError(HarnessError):
    """Raised when an experiment spec or matrix request is invalid"""

    def __init__(self, message, field=None):
        super().__init__(message, {'field': field} if field else None)
        self.field = field
