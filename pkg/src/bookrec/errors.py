"""Exception types raised across the package."""


class BookrecError(Exception):
    """Base class for all errors raised by bookrec."""


class DataError(BookrecError):
    """Problem with input data. The CLI maps these to exit code 1."""


class MalformedLine(DataError):
    def __init__(self, line_no, message="malformed line", path=None):
        self.line_no = line_no
        self.path = path
        where = f"{path}:{line_no}" if path else f"line {line_no}"
        super().__init__(f"{where}: {message}")


class ScoreOutOfRange(MalformedLine):
    def __init__(self, line_no, score, path=None):
        self.score = score
        super().__init__(line_no, f"score {score} outside [1, 5]", path)


class EmptyTagList(MalformedLine):
    def __init__(self, line_no, path=None):
        super().__init__(line_no, "empty tag list", path)


class NoRatings(DataError):
    def __init__(self, user):
        self.user = user
        super().__init__(f"user {user} has no ratings")


class InvalidFraction(BookrecError, ValueError):
    pass


class NonReciprocal(BookrecError, ValueError):
    pass


class UnknownOrder(BookrecError, ValueError):
    pass


class ShapeMismatch(BookrecError, ValueError):
    pass


class ZeroVector(BookrecError, ValueError):
    pass


class LengthMismatch(BookrecError, ValueError):
    pass


class NotADistribution(BookrecError, ValueError):
    pass


class EmptyCommonSet(BookrecError, ValueError):
    pass


class GridTooSmall(BookrecError, ValueError):
    pass


class NoneSelected(BookrecError):
    """No cluster reached the selection threshold."""


class NoSimilarBooks(BookrecError):
    def __init__(self, user, book):
        self.user = user
        self.book = book
        super().__init__(f"user {user} rated no book sharing the first tag of book {book}")


class NoCandidates(BookrecError):
    def __init__(self, user):
        self.user = user
        super().__init__(f"no user shares a rated book with user {user}")


class EmptyRecommendation(BookrecError, ValueError):
    pass
