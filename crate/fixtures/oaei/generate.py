#!/usr/bin/env python3
"""Regenerate the synthetic conference-domain graph pairs in this directory.

Each pair shares three root types and a block of leaf types (40% of each
graph's types are aligned); the rest are drawn from disjoint families. Output
is deterministic for a given seed.
"""
import json
import random
from pathlib import Path

ROOTS = {
    "person": (["Person", "PersonEntity"], ["full_name", "email"]),
    "event": (["Event", "EventItem"], ["event_date", "location"]),
    "document": (["Document", "DocumentItem"], ["doc_title", "doc_language"]),
}

# family: (root, label variants, specific properties)
FAMILIES = {
    "paper": ("document", ["Paper", "PaperSubmission", "SubmittedPaper"], ["abstract", "keyword", "submission_date", "page_limit"]),
    "review": ("document", ["Review", "ReviewReport", "PaperReview"], ["score", "review_text", "confidence_level", "recommendation"]),
    "proceedings": ("document", ["Proceedings", "ProceedingsVolume"], ["isbn", "volume_number", "series"]),
    "invitation": ("document", ["Invitation", "InvitationLetter"], ["invitee", "sent_on", "rsvp"]),
    "decision": ("document", ["Decision", "AcceptanceDecision", "DecisionNotice"], ["outcome", "notified_on", "meta_review"]),
    "camera": ("document", ["CameraReady", "CameraReadyVersion"], ["page_count", "copyright_form", "final_pdf"]),
    "registration": ("document", ["Registration", "RegistrationForm"], ["fee", "payment_status", "badge_name"]),
    "call": ("document", ["CallForPapers", "PaperCall"], ["topics_list", "call_deadline", "call_url"]),
    "reviewer": ("person", ["Reviewer", "ReviewerMember", "PaperReviewer"], ["expertise", "review_load", "conflict_list"]),
    "author": ("person", ["Author", "PaperAuthor", "ContributingAuthor"], ["affiliation", "orcid", "author_rank"]),
    "chair": ("person", ["Chair", "Chairman", "ChairPerson"], ["chair_term", "appointed_by", "chair_budget"]),
    "attendee": ("person", ["Attendee", "MeetingAttendee"], ["dietary_need", "ticket_type", "arrival_day"]),
    "volunteer": ("person", ["Volunteer", "StudentVolunteer"], ["shift", "volunteer_task", "tshirt_size"]),
    "organizer": ("person", ["Organizer", "LocalOrganizer", "Organiser"], ["organizer_role", "contact_phone", "office_hours"]),
    "speaker": ("person", ["Speaker", "InvitedSpeaker"], ["speaker_bio", "honorarium", "travel_grant"]),
    "student": ("person", ["Student", "PhdStudent"], ["advisor", "enrolment_year", "university"]),
    "conference": ("event", ["Conference", "ConferenceEvent", "ScientificConference"], ["venue_city", "start_date", "edition", "acronym"]),
    "session": ("event", ["Session", "SessionSlot", "ConferenceSession"], ["session_room", "time_slot", "moderator"]),
    "workshop": ("event", ["Workshop", "WorkshopEvent", "CoLocatedWorkshop"], ["workshop_theme", "organizer_list", "half_day"]),
    "tutorial": ("event", ["Tutorial", "TutorialTalk"], ["tutorial_level", "duration", "prerequisites"]),
    "keynote": ("event", ["Keynote", "KeynoteSpeech", "KeynoteTalk"], ["talk_title", "livestream", "qa_minutes"]),
    "banquet": ("event", ["Banquet", "BanquetDinner", "GalaBanquet"], ["menu", "seating_plan", "dress_code"]),
    "demo": ("event", ["Demo", "DemoSession"], ["equipment", "demo_url", "table_number"]),
    "poster": ("event", ["Poster", "PosterPresentation", "PosterSession"], ["board_number", "poster_size", "print_service"]),
    "reception": ("event", ["Reception", "WelcomeReception"], ["drinks", "reception_hall", "opening_time"]),
    "sponsor": (None, ["Sponsor", "SponsorCompany", "Sponsorship"], ["sponsorship_level", "amount", "logo"]),
    "venue": (None, ["Venue", "VenueLocation"], ["address", "capacity", "accessibility"]),
    "hotel": (None, ["Hotel", "HotelBooking", "PartnerHotel"], ["room_rate", "check_in", "stars"]),
    "topic": (None, ["Topic", "ResearchTopic", "TopicArea"], ["topic_area", "acm_class", "related_topic"]),
    "track": (None, ["Track", "ResearchTrack", "ConferenceTrack"], ["track_topic", "acceptance_rate", "track_size"]),
    "committee": (None, ["Committee", "ProgramCommittee", "SteeringCommittee"], ["committee_size", "member_list", "meeting_schedule"]),
    "award": (None, ["Award", "BestPaperAward", "AwardPrize"], ["prize_money", "award_category", "jury"]),
    "publisher": (None, ["Publisher", "PublisherHouse", "PublishingCompany"], ["imprint", "country", "open_access"]),
    "deadline": (None, ["Deadline", "SubmissionDeadline", "DueDate"], ["due_date", "extension_allowed", "timezone"]),
}


def camel(name):
    head, *rest = name.split("_")
    return head + "".join(w.capitalize() for w in rest)


def side_props(rng, props, camel_case):
    kept = [p for p in props if rng.random() < 0.8]
    if len(kept) < 2:
        kept = rng.sample(props, 2)
    return sorted(camel(p) if camel_case else p for p in kept)


def etype(id_, props, supers):
    return {"id": id_, "label": id_, "props": props, "superclasses": supers}


def make_pair(seed, n_aligned, n_own, name):
    rng = random.Random(seed)
    fams = sorted(FAMILIES)
    rng.shuffle(fams)
    aligned = fams[:n_aligned]
    own_a = fams[n_aligned:n_aligned + n_own]
    own_b = fams[n_aligned + n_own:n_aligned + 2 * n_own]
    assert len(own_b) == n_own, "not enough families"

    a_types, b_types, gold = [], [], []
    a_root, b_root = {}, {}
    for key in sorted(ROOTS):
        labels, props = ROOTS[key]
        a_types.append(etype(labels[0], props, []))
        b_types.append(etype(labels[1], sorted(camel(p) for p in props), []))
        a_root[key], b_root[key] = labels[0], labels[1]
        gold.append((labels[0], labels[1]))

    def supers(root, table):
        return [table[root]] if root else []

    for fam in aligned:
        root, labels, props = FAMILIES[fam]
        la = labels[0]
        lb = rng.choice(labels[1:])
        a_types.append(etype(la, side_props(rng, props, False), supers(root, a_root)))
        b_types.append(etype(lb, side_props(rng, props, rng.random() < 0.5), supers(root, b_root)))
        gold.append((la, lb))
    for fam in own_a:
        root, labels, props = FAMILIES[fam]
        a_types.append(etype(rng.choice(labels), side_props(rng, props, False), supers(root, a_root)))
    for fam in own_b:
        root, labels, props = FAMILIES[fam]
        b_types.append(etype(rng.choice(labels), side_props(rng, props, rng.random() < 0.5), supers(root, b_root)))

    a = {"name": f"{name}-a", "etypes": sorted(a_types, key=lambda t: t["id"]), "entities": []}
    b = {"name": f"{name}-b", "etypes": sorted(b_types, key=lambda t: t["id"]), "entities": []}
    return a, b, sorted(gold)


def write(out, name, a, b, gold):
    for side, g in (("a", a), ("b", b)):
        (out / f"{name}-{side}.json").write_text(json.dumps(g, indent=2) + "\n")
    (out / f"{name}-gold.tsv").write_text("".join(f"{l}\t{r}\t=\t1\n" for l, r in gold))


if __name__ == "__main__":
    out = Path(__file__).resolve().parent
    # 3 roots + 5 aligned leaves + 12 own = 20 types per graph, 8 aligned.
    write(out, "train", *make_pair(11, 5, 12, "train"))
    # 3 roots + 3 aligned leaves + 9 own = 15 types per graph, 6 aligned.
    write(out, "test", *make_pair(23, 3, 9, "test"))
