import io
from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import link_records, make_link
from linktrust.errors import DuplicateLink, IllegalAudience, MalformedRow, SelfLink
from linktrust.model import (LINK_COLUMNS, AudienceLevel, LinkDisposition, PrivacySnapshot,
                             group_by_owner, links_to_csv, parse_link_records,
                             parse_privacy_snapshots, parse_timestamp, write_privacy_snapshots)

HEADER = ",".join(LINK_COLUMNS)


def parse(text):
    return parse_link_records(io.StringIO(text))


def test_header_order_is_fixed():
    assert HEADER == ("owner,friend,are_family,common_chat_messages,common_friends,"
                      "common_groups,common_posts,tagged_photos,tagged_videos,"
                      "owner_friend_count,friend_friend_count,disposition")


def test_parse_row_with_absent_friend_degree():
    [r] = parse(HEADER + "\nu1,f1,1,3,2,1,0,0,0,10,,recommended_restricted\n")
    assert r.are_family is True
    assert r.friend_friend_count is None
    assert r.disposition is LinkDisposition.RECOMMENDED_RESTRICTED
    assert r.restricted


@pytest.mark.parametrize("row, error", [
    ("u1,u1,0,0,0,0,0,0,0,10,5,all_unrestricted", SelfLink),
    ("u1,f1,0,-1,0,0,0,0,0,10,5,all_unrestricted", MalformedRow),
    ("u1,f1,2,0,0,0,0,0,0,10,5,all_unrestricted", MalformedRow),
    ("u1,f1,0,0,0,0,0,0,0,10,5,blocked", MalformedRow),
    ("u1,f1,0,0,9,0,0,0,0,10,5,all_unrestricted", MalformedRow),   # CF > friend degree
    ("u1,f1,0,0,11,0,0,0,0,10,,all_unrestricted", MalformedRow),   # CF > owner degree
    ("u1,f1,0,0,0,0,0,0,0,0,5,all_unrestricted", MalformedRow),
])
def test_invalid_rows(row, error):
    with pytest.raises(error):
        parse(HEADER + "\n" + row + "\n")


def test_duplicate_link_reports_line():
    row = "u1,f1,0,0,0,0,0,0,0,10,5,all_unrestricted\n"
    with pytest.raises(DuplicateLink, match="line 3"):
        parse(HEADER + "\n" + row + row)


def test_missing_column():
    with pytest.raises(MalformedRow):
        parse("owner,friend\nu1,f1\n")


def test_malformed_row_carries_line_number():
    with pytest.raises(MalformedRow) as info:
        parse(HEADER + "\nu1,f1,0,0,0,0,0,0,0,10,5,all_unrestricted\nu1,f2,0,x,0,0,0,0,0,10,5,"
              "all_unrestricted\n")
    assert info.value.line == 3


@given(st.lists(link_records(), min_size=1, max_size=20, unique_by=lambda r: r.friend))
def test_csv_roundtrip(records):
    assert parse(links_to_csv(records)) == records


def test_group_by_owner_keeps_first_seen_order():
    links = [make_link("b", "x"), make_link("a", "y"), make_link("b", "z")]
    groups = group_by_owner(links)
    assert list(groups) == ["b", "a"]
    assert [l.friend for l in groups["b"]] == ["x", "z"]


# snapshots

SNAP_HEADER = ("user,timestamp_iso8601,installed_app_count,default_privacy,lookup,share_address,"
               "send_messages,receive_friend_requests,tag_suggestions,view_birthday")
OK_SETTINGS = "friends,everyone,friends,everyone,everyone,friends,friends"


def test_parse_snapshots_sorted_and_utc():
    text = (SNAP_HEADER + "\n"
            f"b,2013-01-02T00:00:00Z,5,{OK_SETTINGS}\n"
            f"a,2013-01-03T02:00:00+02:00,7,{OK_SETTINGS}\n"
            f"a,2013-01-01T00:00:00,3,{OK_SETTINGS}\n")
    snaps = parse_privacy_snapshots(io.StringIO(text))
    assert [(s.user, s.installed_app_count) for s in snaps] == [("a", 3), ("a", 7), ("b", 5)]
    assert snaps[1].timestamp == datetime(2013, 1, 3, tzinfo=timezone.utc)
    buf = io.StringIO()
    write_privacy_snapshots(snaps, buf)
    buf.seek(0)
    assert parse_privacy_snapshots(buf) == snaps


def test_illegal_audience_for_setting():
    # tag suggestions cannot be shown to everyone
    bad = "friends,everyone,friends,everyone,everyone,everyone,friends"
    with pytest.raises(IllegalAudience):
        parse_privacy_snapshots(io.StringIO(SNAP_HEADER + f"\na,2013-01-01T00:00:00Z,1,{bad}\n"))


def test_snapshot_requires_aware_timestamp():
    levels = dict(default_privacy=AudienceLevel.FRIENDS, lookup=AudienceLevel.EVERYONE,
                  share_address=AudienceLevel.FRIENDS, send_messages=AudienceLevel.EVERYONE,
                  receive_friend_requests=AudienceLevel.EVERYONE,
                  tag_suggestions=AudienceLevel.FRIENDS, view_birthday=AudienceLevel.FRIENDS)
    with pytest.raises(ValueError):
        PrivacySnapshot("a", datetime(2013, 1, 1), 1, **levels)


def test_parse_timestamp_z_suffix():
    assert parse_timestamp("2013-05-01T10:00:00Z") == datetime(2013, 5, 1, 10, tzinfo=timezone.utc)
