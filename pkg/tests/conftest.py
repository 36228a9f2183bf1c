import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from uu_audit import synth


@pytest.fixture(scope="session")
def small_course():
    """A 60-student flipped-style course, shared across test modules."""
    cfg = synth.load_preset("flipped", n_students=60, seed=7)
    return synth.generate_course_data(cfg)


@pytest.fixture(scope="session")
def small_course_vectors(small_course):
    from uu_audit.features import build_student_vectors

    users = [o.user_id for o in small_course.outcomes]
    vectors, stats, diag = build_student_vectors(
        small_course.events, small_course.schedule, users, small_course.demographics
    )
    y = {o.user_id: o.y for o in small_course.outcomes}
    X = np.vstack([v.values for v in vectors])
    labels = np.array([y[v.user_id] for v in vectors])
    return vectors, X, labels
