from enum import Enum, auto


class SdpStatus(str, Enum):
    optimal = auto()
    max_iter = auto()
    infeasible_detected = auto()

    @staticmethod
    def get_enum_from_str(name: str):
        return SdpStatus[name] if name in SdpStatus.__members__ else None

    def __str__(self) -> str:
        return self.name


class DerivativeMode(str, Enum):
    analytic = auto()
    numeric = auto()

    @staticmethod
    def get_enum_from_str(name: str):
        return DerivativeMode[name] if name in DerivativeMode.__members__ else None

    def __str__(self) -> str:
        return self.name


class OutputFormat(str, Enum):
    table = auto()
    csv = auto()
    structured = auto()

    @staticmethod
    def get_enum_from_str(name: str):
        return OutputFormat[name] if name in OutputFormat.__members__ else None

    def __str__(self) -> str:
        return self.name


class Command(str, Enum):
    bounds = auto()
    gaussian = auto()
    qlan = auto()
    bayes = auto()
    simulate = auto()
    table1 = auto()
    figures = auto()

    @staticmethod
    def get_enum_from_str(name: str):
        return Command[name] if name in Command.__members__ else None

    def __str__(self) -> str:
        return self.name


class BayesKind(str, Enum):
    single = auto()
    multi = auto()
    van_trees = auto()
    holevo = auto()
    covariant_pure = auto()
    covariant_mixed = auto()

    @staticmethod
    def get_enum_from_str(name: str):
        # CLI spells kinds with dashes
        name = name.replace("-", "_") if name else name
        return BayesKind[name] if name in BayesKind.__members__ else None

    def __str__(self) -> str:
        return self.name


class RadialEstimator(str, Enum):
    one_step = auto()
    total_spin = auto()

    @staticmethod
    def get_enum_from_str(name: str):
        name = name.replace("-", "_") if name else name
        return RadialEstimator[name] if name in RadialEstimator.__members__ else None

    def __str__(self) -> str:
        return self.name


class HcrMethod(str, Enum):
    # member named like enum.auto, so spell the values out
    auto = "auto"
    closed_form = "closed_form"
    sdp = "sdp"

    @staticmethod
    def get_enum_from_str(name: str):
        name = name.replace("-", "_") if name else name
        return HcrMethod[name] if name in HcrMethod.__members__ else None

    def __str__(self) -> str:
        return self.name
