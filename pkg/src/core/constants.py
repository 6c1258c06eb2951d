"""
Константы приложения.
"""

# Классы и метки манифеста
NUM_CLASSES = 3
CLASS_NAMES = {
    0: "normal",
    1: "covid",
    2: "pneumonia"
}
POSITIVE_CLASS = 1

# Синонимы меток (регистр не важен), включая имена папок исходного датасета
LABEL_ALIASES = {
    "normal": 0,
    "covid": 1,
    "covid-19": 1,
    "covid19": 1,
    "pneumonia": 2,
    "non-covid": 2
}

SPLITS = ("train", "val", "test")
MANIFEST_COLUMNS = ("path", "label", "split", "mask_path")

# Аугментация (диапазоны по умолчанию)
RESCALE = 1.0 / 255.0
ZOOM_RANGE = (0.80, 1.20)
ROTATION_RANGE = (0.0, 180.0)
WIDTH_SHIFT = 0.20
HEIGHT_SHIFT = 0.20
SHEAR_RANGE = 10.0
FLIP_PROBABILITY = 0.5

# Оптимизатор Adam
LEARNING_RATE = 0.0001
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# Снижение шага на плато
PLATEAU_FACTOR = 0.2
PLATEAU_PATIENCE = 2
PLATEAU_MIN_DELTA = 0.0001

# Ранняя остановка
EARLY_STOP_PATIENCE = 15
MAX_EPOCHS = 100
BATCH_SIZE = 32
ROUNDS = 15

# Допуск при сравнении приращения потерь с порогом
DELTA_TOLERANCE = 1e-12

# Атака
EPSILON = 0.02
CLIP_MIN = 0.0
CLIP_MAX = 1.0

# Grad-CAM
OVERLAY_ALPHA = 0.4
TOP_Q = 0.2

# Доверительный интервал
CONFIDENCE = 0.95

# Формат контрольной точки
CHECKPOINT_MAGIC = b"RLCK"
CHECKPOINT_VERSION = 1
CHECKPOINT_FILE = "checkpoint.rlck"
RECORD_FILE = "record.json"
CONFIG_FILE = "config.json"
REPORT_TXT = "report.txt"
REPORT_JSON = "report.json"

# Коды завершения CLI
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3
