class PreconditionError(ValueError):
    """A mechanism was asked to run on an instance outside its domain."""
