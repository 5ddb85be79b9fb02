"""Constantes centralizadas para el módulo EraNavegacion."""

# ============================================================================
# MUNDO CINEMÁTICO
# ============================================================================

DT_DEFAULT = 0.05
MAX_SIM_STEPS_DEFAULT = 600
V_MAX_DEFAULT = 5.0
INTRUDER_V_MAX_DEFAULT = 3.0

RADIO_COLISION = 0.5
RADIO_ADVERTENCIA = 2.0
RADIO_DISPARO = 10.0
RADIO_META = 1.0

# Anillo donde se muestrea la meta alrededor del inicio (m)
META_DISTANCIA_MIN = 30.0
META_DISTANCIA_MAX = 45.0
ALTURA_INICIAL = 10.0
# Variación vertical máxima de meta e intrusos respecto del inicio (m)
VARIACION_ALTURA = 2.0

REINTENTOS_SPAWN = 10

# Tipo A: desviación estándar de la perturbación de velocidad por paso (m/s)
SIGMA_TIPO_A = 0.3
# La perturbación se recorta a +-3 sigma por componente
LIMITE_SIGMAS_TIPO_A = 3.0
# Tipo B: extrapolación del ego a velocidad constante (s)
HORIZONTE_PREDICCION_TIPO_B = 1.0
# Horizonte del punto de máxima aproximación usado para el riesgo (s)
HORIZONTE_RIESGO = 3.0
# Disparo semántico: radio extendido relativo a d_threshold
FACTOR_RADIO_SEMANTICO = 1.5

# ============================================================================
# CAMPO POTENCIAL VIRTUAL (EXPERTO)
# ============================================================================

K_ATRACCION = 1.0
K_REPULSION = 20.0
K_VORTICE = 0.0
REPULSION_MAXIMA = 50.0

# ============================================================================
# CURRÍCULO
# ============================================================================

EPISODIOS_CURRICULO = 100
INTRUSOS_MIN = 5
INTRUSOS_MAX = 25
GANANCIA_VELOCIDAD_CURRICULO = 0.5
INICIO_TIPO_B = 0.3

# Presets de dificultad fija: (intrusos, escala de velocidad, xi)
PRESETS_DIFICULTAD = {
    "easy": (5, 0.6, 0.0),
    "medium": (10, 0.8, 1.0 / 3.0),
    "hard": (17, 1.0, 2.0 / 3.0),
    "extreme": (25, 1.25, 1.0),
}

# ============================================================================
# CODIFICADOR DE EVENTOS
# ============================================================================

ANCHO_ELEMENTO = 10
ANCHO_GLOBAL = 8
DIM_LATENTE = 32
DIM_OCULTA = 64
DIM_ACCION = 3

COSTO_SIN_PAREJA = 1.0
PESO_VELOCIDAD_CHAMFER = 0.5
PESO_GLOBAL_CHAMFER = 1.0
PESO_ISOTROPIA = 1e-3

# ============================================================================
# DINÁMICA LATENTE
# ============================================================================

GAMMA_CONTRACCION = 0.99
RIDGE_DEFAULT = 1e-6
ITERACIONES_POTENCIA = 100
TOLERANCIA_POTENCIA = 1e-10

# ============================================================================
# BANCO DE CONOCIMIENTO
# ============================================================================

VERSION_BANCO = 1
VERSION_MODELO = 1
SIMILITUD = "cosine"
ITERACIONES_KMEANS = 20
FRACCION_RECONSTRUCCION = 0.10
FACTOR_PENALIZACION = 0.9
PISO_CONFIABILIDAD = 0.05

# ============================================================================
# CONTROLADOR ERA
# ============================================================================

K_DEFAULT = 8
TAU_DEFAULT = 0.1
ALPHA_DEFAULT = 1.0
MARGEN_DELTA_V = 0.0
UMBRAL_CLUSTER = 0.5
UMBRAL_IMPLICACION = 0.2
UMBRAL_NOVEDAD = 0.95
# Escudo: similitud mínima del mejor candidato para actuar desde la memoria
SIMILITUD_MINIMA = 0.5
LAMBDA_P = 1.0
LAMBDA_R = 1.0

RECOMPENSA_EXITO = 1.0
RECOMPENSA_COLISION = -1.0
PENALIZACION_ADVERTENCIA = -0.1
GANANCIA_PROGRESO = 0.01

# ============================================================================
# ARNÉS
# ============================================================================

EPISODIOS_EXPERTO = 500
SEMILLAS_EVALUACION = 25
TAMANOS_BENCH = (10_000, 30_000, 100_000)
LLAMADAS_BENCH = 1000

ARCHIVO_MODELO = "model.json"
ARCHIVO_BANCO = "bank.jsonl"
ARCHIVO_PERDIDA = "pretrain_loss.jsonl"
ARCHIVO_DATASET = "dataset.jsonl"
ARCHIVO_LOG_ENTRENAMIENTO = "train_log.jsonl"
ARCHIVO_TRAZAS = "traces.jsonl"
FORMATO_CHECKPOINT = "bank_ep{episodio:03d}.jsonl"

CODIGO_SALIDA_OK = 0
CODIGO_SALIDA_ERROR = 1
CODIGO_SALIDA_USO = 2
