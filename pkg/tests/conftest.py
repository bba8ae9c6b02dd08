import sys
from pathlib import Path

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from linktrust.model import LinkDisposition, LinkRecord

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def make_link(owner="u1", friend="f1", *, family=False, chat=0, cf=0, groups=0, posts=0,
              photos=0, videos=0, ofc=100, ffc=50,
              disposition=LinkDisposition.ALL_UNRESTRICTED) -> LinkRecord:
    return LinkRecord(owner=owner, friend=friend, are_family=family,
                      common_chat_messages=chat, common_friends=cf, common_groups=groups,
                      common_posts=posts, tagged_photos=photos, tagged_videos=videos,
                      owner_friend_count=ofc, friend_friend_count=ffc,
                      disposition=disposition)


@st.composite
def link_records(draw, owner="u1", friend=None):
    ofc = draw(st.integers(1, 2000))
    cf = draw(st.integers(0, ofc))
    ffc = draw(st.one_of(st.none(), st.integers(cf, cf + 3000)))
    return make_link(
        owner=owner,
        friend=friend or draw(st.text("abcdef0123456789", min_size=1, max_size=6)),
        family=draw(st.booleans()),
        chat=draw(st.integers(0, 5000)), cf=cf,
        groups=draw(st.integers(0, 50)), posts=draw(st.integers(0, 50)),
        photos=draw(st.integers(0, 50)), videos=draw(st.integers(0, 50)),
        ofc=ofc, ffc=ffc, disposition=draw(st.sampled_from(list(LinkDisposition))))


@st.composite
def owner_links(draw, owner="u1", min_size=1, max_size=60):
    n = draw(st.integers(min_size, max_size))
    return [draw(link_records(owner=owner, friend=f"f{i:03d}")) for i in range(n)]


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is not None and acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance.RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture
def small_population():
    from linktrust.synth import PopulationConfig, generate_population
    return generate_population(PopulationConfig(n_users=25, seed=3))
