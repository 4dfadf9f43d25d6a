"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Arguments violate an operation's preconditions."""


class CapacityError(RuntimeError):
    """Requested problem size exceeds a configured memory guard."""


class StructureViolationError(ValueError):
    """A circuit does not have the block structure a backend relies on."""


class FormatError(ValueError):
    """A binary or text file does not match its declared layout."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class TileError(RuntimeError):
    """A worker failed while computing one tile of a kernel matrix."""

    def __init__(self, tile, cause):
        super().__init__(f"tile rows {tile[0]}:{tile[1]} cols {tile[2]}:{tile[3]} failed: {cause!r}")
        self.tile = tile
        self.cause = cause
