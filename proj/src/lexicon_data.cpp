// Copyright 2026 The botscreen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "botscreen/lexicon.hpp"

namespace botscreen {

namespace {
constexpr std::string_view kGivenNames = R"(
aaliyah
aaron
abigail
adam
addison
adrian
aiden
alex
alexander
alexandra
alexis
alice
alicia
allison
alyssa
amanda
amber
amelia
amy
andrea
andrew
angela
anna
anthony
ariana
ashley
audrey
austin
ava
bailey
barbara
benjamin
beth
betty
brandon
brenda
brian
brittany
brooke
caleb
cameron
carlos
caroline
carter
catherine
charles
charlotte
chloe
chris
christian
christina
christopher
claire
daniel
danielle
david
deborah
dennis
diana
donna
dylan
edward
elijah
elizabeth
ella
ellie
emily
emma
eric
ethan
evelyn
gabriel
gabriella
george
grace
hailey
hannah
harper
heather
henry
isaac
isabella
jack
jackson
jacob
james
jasmine
jason
jayden
jennifer
jessica
joan
john
jonathan
jordan
jose
joseph
joshua
julia
justin
karen
katherine
kayla
kelly
kevin
kimberly
kyle
laura
lauren
layla
leah
liam
lillian
lily
linda
logan
lucas
lucy
luke
madison
maria
mark
mary
mason
matthew
megan
melissa
mia
michael
michelle
mila
natalie
nathan
nicholas
nicole
noah
olivia
owen
patricia
paul
rachel
rebecca
richard
riley
robert
ryan
samantha
samuel
sandra
sarah
savannah
scarlett
sebastian
sofia
sophia
stephanie
steven
susan
taylor
thomas
tiffany
tyler
victoria
william
wyatt
zoe
)";

constexpr std::string_view kStopwords = R"(
about
above
after
again
against
all
am
an
and
any
are
as
at
be
because
been
before
being
below
between
both
but
by
can
did
do
does
doing
don
down
during
each
few
for
from
further
had
has
have
having
he
her
here
hers
herself
him
himself
his
how
if
in
into
is
it
its
itself
just
me
more
most
my
myself
no
nor
not
of
off
on
once
only
or
other
our
ours
ourselves
out
over
own
same
she
should
so
some
such
than
that
the
their
theirs
them
themselves
then
there
these
they
this
those
through
to
too
under
until
up
very
was
we
were
what
when
where
which
while
who
whom
why
will
with
you
your
yours
yourself
yourselves
amp
rt
via
)";
}  // namespace

namespace detail {

std::string_view given_names_text() { return kGivenNames; }
std::string_view stopwords_text() { return kStopwords; }

}  // namespace detail
}  // namespace botscreen
