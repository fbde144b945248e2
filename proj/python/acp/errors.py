class AcpError(Exception):
    """Raised for library errors; `code` is the wire error code."""

    def __init__(self, code, detail, data=None):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail
        self.data = data or {}
