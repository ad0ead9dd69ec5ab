from django.test import SimpleTestCase

from Imnet.services.errors import (
    ArityMismatch,
    HeterogeneousEvent,
    LengthMismatch,
    OnceOperandError,
    PredicateTypeError,
    ShapeError,
    TypeMismatch,
    UnboundVariable,
)
from Imnet.services.syntax import ConstVal, MakeRule, Merge, Once, Var, parse_program
from Imnet.services.transformers import (
    eval_apply_left,
    eval_apply_right,
    eval_filter,
    eval_lift,
    eval_make_rule,
    eval_mak_forw_rule,
    eval_merge,
    eval_mix_fst,
    eval_mix_snd,
    eval_once,
    eval_transformer,
)
from Imnet.services.values import (
    WILDCARD,
    Action,
    Bool,
    Event,
    InitialRuleAssignment,
    IpAddr,
    Nat,
    Pattern,
    Port,
    Rule,
    RuleList,
    SetValue,
    TupleValue,
    VariableState,
)

from .helpers import ID1, ID2, fabric_with_arrivals, controller_rule_triples, controller_rules, lambda_of


def nats(*numbers):
    return Event(tuple(Nat(n) for n in numbers))


class TransformerTestCase(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        fabric, cls.pk1, cls.pk2 = fabric_with_arrivals()
        cls.env = fabric.view()

    def gamma(self, **bindings):
        return VariableState(bindings)


class LiftTests(TransformerTestCase):

    def test_maps_every_element(self):
        result = eval_lift('x', lambda_of('t + 1'), self.gamma(x=nats(1, 2, 3)), self.env)
        self.assertEqual(result, nats(2, 3, 4))

    def test_empty_event(self):
        self.assertEqual(eval_lift('x', lambda_of('t + 1'), self.gamma(x=Event()), self.env), Event())

    def test_pairs_switches_with_rules(self):
        gamma = self.gamma(z=Event.of(ID1, ID2), y=controller_rules())
        result = eval_lift('z', lambda_of('(t, y)'), gamma, self.env)
        self.assertEqual(result, Event.of(TupleValue((ID1, controller_rules())), TupleValue((ID2, controller_rules()))))

    def test_tags_port_packet_pairs_with_their_switch(self):
        ports = Event.of(TupleValue((Port(1), self.pk1)), TupleValue((Port(2), self.pk2)))
        result = eval_lift('y', lambda_of('(t, switch(t, z))'), self.gamma(y=ports, z=Event.of(ID1, ID2)), self.env)
        self.assertEqual(result, Event.of(TupleValue((ID1, Port(1), self.pk1)), TupleValue((ID2, Port(2), self.pk2))))

    def test_failure_carries_element_index(self):
        with self.assertRaises(TypeMismatch) as caught:
            eval_lift('x', lambda_of('t - 2'), self.gamma(x=nats(5, 4, 1)), self.env)
        self.assertEqual(caught.exception.index, 2)

    def test_result_must_be_homogeneous(self):
        fn = lambda_of('t.0')
        gamma = self.gamma(x=Event.of(TupleValue((Nat(1), Nat(2))), TupleValue((ID1, Nat(2)))))
        with self.assertRaises(HeterogeneousEvent):
            eval_lift('x', fn, gamma, self.env)

    def test_operand_must_be_an_event(self):
        with self.assertRaises(TypeMismatch):
            eval_lift('y', lambda_of('t'), self.gamma(y=controller_rules()), self.env)

    def test_unbound_operand(self):
        with self.assertRaises(UnboundVariable):
            eval_lift('x', lambda_of('t'), self.gamma(), self.env)


class ApplyTests(TransformerTestCase):

    def setUp(self):
        self.pairs = Event.of(TupleValue((Nat(1), Nat(10))), TupleValue((Nat(2), Nat(20))))

    def test_apply_left(self):
        result = eval_apply_left('p', lambda_of('t + 5'), self.gamma(p=self.pairs), self.env)
        self.assertEqual(result, Event.of(TupleValue((Nat(6), Nat(10))), TupleValue((Nat(7), Nat(20)))))

    def test_apply_right(self):
        result = eval_apply_right('p', lambda_of('t + 1'), self.gamma(p=self.pairs), self.env)
        self.assertEqual(result, Event.of(TupleValue((Nat(1), Nat(11))), TupleValue((Nat(2), Nat(21)))))

    def test_apply_on_empty_event(self):
        self.assertEqual(eval_apply_right('p', lambda_of('t'), self.gamma(p=Event()), self.env), Event())

    def test_apply_left_on_source_ips(self):
        source_ips = self.env.query('SourceIps')
        result = eval_apply_left('y', lambda_of('port(t)'), self.gamma(y=source_ips), self.env)
        self.assertEqual(result, Event.of(TupleValue((Port(1), self.pk1)), TupleValue((Port(2), self.pk2))))

    def test_result_pairs_are_not_flattened(self):
        fn = lambda_of('(t, t)')
        result = eval_apply_left('p', fn, self.gamma(p=self.pairs), self.env)
        self.assertEqual(result[0], TupleValue((TupleValue((Nat(1), Nat(1))), Nat(10))))

    def test_needs_pairs(self):
        with self.assertRaises(ShapeError) as caught:
            eval_apply_right('p', lambda_of('t'), self.gamma(p=nats(1)), self.env)
        self.assertEqual(caught.exception.index, 0)


class MergeTests(TransformerTestCase):

    def test_zips(self):
        gamma = self.gamma(a=nats(1, 2), b=Event.of(ID1, ID2))
        self.assertEqual(eval_merge('a', 'b', gamma),
                         Event.of(TupleValue((Nat(1), ID1)), TupleValue((Nat(2), ID2))))

    def test_unequal_lengths(self):
        with self.assertRaises(LengthMismatch) as caught:
            eval_merge('a', 'b', self.gamma(a=nats(1, 2), b=nats(1)))
        self.assertEqual(caught.exception.lengths, (2, 1))
        self.assertEqual(caught.exception.code, 'length-mismatch')


class FilterTests(TransformerTestCase):

    def test_keeps_order(self):
        result = eval_filter('x', lambda_of('t % 2 == 0'), self.gamma(x=nats(4, 1, 2, 3, 8)), self.env)
        self.assertEqual(result, nats(4, 2, 8))

    def test_predicate_must_be_boolean(self):
        with self.assertRaises(PredicateTypeError) as caught:
            eval_filter('x', lambda_of('t'), self.gamma(x=nats(1)), self.env)
        self.assertEqual(caught.exception.index, 0)

    def test_packets_by_header(self):
        gamma = self.gamma(x=self.env.query('ArrivedPackets'))
        result = eval_filter('x', lambda_of('srcip(t) == 10.0.0.2'), gamma, self.env)
        self.assertEqual(result, Event.of(self.pk2))


class MixTests(TransformerTestCase):

    def test_mix_first_accumulates_left(self):
        gamma = self.gamma(a=nats(1, 2, 1), b=Event.of(ID1, ID2, ID1))
        result = eval_mix_fst(SetValue(), 'a', 'b', gamma)
        self.assertEqual(result, Event.of(
            TupleValue((SetValue((Nat(1),)), ID1)),
            TupleValue((SetValue((Nat(1), Nat(2))), ID2)),
            TupleValue((SetValue((Nat(1), Nat(2))), ID1)),
        ))

    def test_mix_second_accumulates_right(self):
        gamma = self.gamma(a=Event.of(ID1, ID2), b=nats(3, 4))
        result = eval_mix_snd(SetValue((Nat(9),)), 'a', 'b', gamma)
        self.assertEqual(result, Event.of(
            TupleValue((ID1, SetValue((Nat(9), Nat(3))))),
            TupleValue((ID2, SetValue((Nat(9), Nat(3), Nat(4))))),
        ))

    def test_unequal_lengths(self):
        with self.assertRaises(LengthMismatch):
            eval_mix_fst(SetValue(), 'a', 'b', self.gamma(a=nats(1), b=nats()))


class OnceTests(TransformerTestCase):

    def test_constant(self):
        self.assertEqual(eval_once(ConstVal(Nat(7)), 3, self.gamma()), nats(7, 7, 7))

    def test_zero_copies(self):
        self.assertEqual(eval_once(ConstVal(Nat(7)), 0, self.gamma()), Event())

    def test_rule_list_variable(self):
        result = eval_once(Var('y'), 2, self.gamma(y=controller_rules()))
        self.assertEqual(result, Event.of(controller_rules(), controller_rules()))

    def test_singleton_event_variable(self):
        self.assertEqual(eval_once(Var('x'), 2, self.gamma(x=nats(5))), nats(5, 5))

    def test_longer_event_is_rejected(self):
        with self.assertRaises(OnceOperandError):
            eval_once(Var('x'), 2, self.gamma(x=nats(5, 6)))

    def test_assignment_is_rejected(self):
        with self.assertRaises(OnceOperandError):
            eval_once(Var('x'), 2, self.gamma(x=InitialRuleAssignment()))


class RuleConstructionTests(TransformerTestCase):

    def test_make_rule(self):
        self.assertEqual(eval_make_rule('x', self.gamma(x=controller_rule_triples())), controller_rules())

    def test_make_rule_applies_argument(self):
        triple = TupleValue((Pattern.of(dstport=80), Action.send_out(), Port(3)))
        result = eval_make_rule('x', self.gamma(x=Event.of(triple)))
        self.assertEqual(result, RuleList((Rule(Pattern.of(dstport=80), (Action.send_out(3),)),)))

    def test_make_rule_arity(self):
        triple = TupleValue((Pattern(), Action.send_out(), WILDCARD))
        with self.assertRaises(ArityMismatch) as caught:
            eval_make_rule('x', self.gamma(x=Event.of(*controller_rule_triples(), triple)))
        self.assertEqual(caught.exception.index, 2)

    def test_make_rule_shape(self):
        with self.assertRaises(ShapeError):
            eval_make_rule('x', self.gamma(x=Event.of(TupleValue((Pattern(), Action.send_all())))))

    def test_mak_forw_rule(self):
        triple = TupleValue((ID1, Port(1), self.pk1))
        result = eval_mak_forw_rule('y', self.gamma(y=Event.of(triple)))
        expected = RuleList((Rule(Pattern.exact(self.pk1), (Action.send_out(1),)),))
        self.assertEqual(result, InitialRuleAssignment(((ID1, expected),)))

    def test_mak_forw_rule_accepts_numbers_as_ports(self):
        triple = TupleValue((ID2, Nat(2), self.pk2))
        result = eval_mak_forw_rule('y', self.gamma(y=Event.of(triple)))
        self.assertEqual(str(result.bindings[0][1].rules[0].actions[0]), 'sendout(2)')

    def test_mak_forw_rule_shape(self):
        triple = TupleValue((ID1, IpAddr.parse('10.0.0.1'), self.pk1))
        with self.assertRaises(ShapeError):
            eval_mak_forw_rule('y', self.gamma(y=Event.of(triple)))


class DispatchTests(TransformerTestCase):

    def test_dispatches_parsed_transformers(self):
        program = parse_program('>>\nr := Filter(x, \\t -> t < 3);')
        result = eval_transformer(program.body.transformer, self.gamma(x=nats(1, 5, 2)), self.env)
        self.assertEqual(result, nats(1, 2))

    def test_dispatch_by_node(self):
        gamma = self.gamma(a=nats(1), b=nats(2), x=controller_rule_triples())
        self.assertEqual(eval_transformer(Merge('a', 'b'), gamma, self.env),
                         Event.of(TupleValue((Nat(1), Nat(2)))))
        self.assertEqual(eval_transformer(Once(ConstVal(Bool(True)), 1), gamma, self.env),
                         Event.of(Bool(True)))
        self.assertEqual(eval_transformer(MakeRule('x'), gamma, self.env), controller_rules())
